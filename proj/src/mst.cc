#include "gpprobe/mst.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "gpprobe/error.h"

namespace gpprobe {

namespace {

void CheckDistanceMatrix(std::span<const double> d, int n) {
  if (n < 1) throw ValidationError("distance matrix needs n >= 1");
  if (d.size() != static_cast<std::size_t>(n) * n) {
    throw ValidationError("distance matrix size does not match n");
  }
  for (int i = 0; i < n; ++i) {
    if (d[i * n + i] != 0.0) throw ValidationError("distance matrix has non-zero diagonal");
    for (int j = i + 1; j < n; ++j) {
      const double a = d[i * n + j];
      const double b = d[j * n + i];
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("distance matrix has non-finite entries");
      }
      if (a < 0.0 || b < 0.0) throw ValidationError("distance matrix has negative entries");
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        throw ValidationError("distance matrix is asymmetric");
      }
    }
  }
}

}  // namespace

std::vector<Edge> DecodeMst(std::span<const double> d, int n) {
  CheckDistanceMatrix(d, n);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<bool> in_tree(n, false);
  std::vector<double> best_w(n, kInf);
  std::vector<Edge> best_e(n);
  std::vector<Edge> edges;
  edges.reserve(n > 0 ? n - 1 : 0);

  int current = 0;
  in_tree[0] = true;
  for (int step = 1; step < n; ++step) {
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      // Read the upper triangle so both orientations see the same weight.
      const double w = current < v ? d[current * n + v] : d[v * n + current];
      const Edge e = Edge::Make(current, v);
      if (std::tie(w, e) < std::tie(best_w[v], best_e[v])) {
        best_w[v] = w;
        best_e[v] = e;
      }
    }
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (pick < 0 || std::tie(best_w[v], best_e[v]) < std::tie(best_w[pick], best_e[pick])) {
        pick = v;
      }
    }
    in_tree[pick] = true;
    edges.push_back(best_e[pick]);
    current = pick;
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

double TreeWeight(std::span<const double> d, int n, const std::vector<Edge>& edges) {
  double w = 0.0;
  for (const Edge& e : edges) w += d[e.a * n + e.b];
  return w;
}

}  // namespace gpprobe
