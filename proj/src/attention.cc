#include "gpprobe/attention.h"

#include <algorithm>
#include <cmath>

#include "gpprobe/error.h"

namespace gpprobe {

SpanReduction ParseSpanReduction(std::string_view s) {
  if (s == "max") return SpanReduction::kMax;
  if (s == "mean") return SpanReduction::kMean;
  throw ValidationError("unknown span reduction '" + std::string(s) + "' (max|mean)");
}

double Evidence(const FloatTensor& attention, int layer, int head, TokenSpan later,
                TokenSpan earlier, SpanReduction reduction) {
  double best = 0.0;
  double sum = 0.0;
  int count = 0;
  for (int q = later.begin; q < later.end; ++q) {
    const auto row = attention.Row({static_cast<std::size_t>(layer),
                                    static_cast<std::size_t>(head),
                                    static_cast<std::size_t>(q)});
    for (int k = earlier.begin; k < earlier.end; ++k) {
      const double w = row[k];
      best = std::max(best, w);
      sum += w;
      ++count;
    }
  }
  if (count == 0) return 0.0;
  return reduction == SpanReduction::kMax ? best : sum / count;
}

HeadMatrix HeadSensitivity(const FloatTensor& attention, const RoleTokenSpans& spans,
                           SpanReduction reduction) {
  if (attention.rank() != 4) throw ValidationError("attention tensor must be rank 4");
  const auto require = [](TokenSpan s, const char* name) {
    if (s.empty()) throw ValidationError(std::string("missing role span: ") + name);
  };
  require(spans.verb1, "verb1");
  require(spans.np_head, "np_head");
  require(spans.verb2, "verb2");
  const int T = static_cast<int>(attention.dim(2));
  for (TokenSpan s : {spans.verb1, spans.np_head, spans.verb2}) {
    if (s.end > T) throw ValidationError("role span exceeds attention size");
  }
  HeadMatrix out(static_cast<int>(attention.dim(0)), static_cast<int>(attention.dim(1)));
  for (int l = 0; l < out.n_layers; ++l) {
    for (int h = 0; h < out.n_heads; ++h) {
      const double positive = Evidence(attention, l, h, spans.verb2, spans.np_head, reduction);
      const double negative = Evidence(attention, l, h, spans.np_head, spans.verb1, reduction);
      out.at(l, h) = positive - negative;
    }
  }
  return out;
}

HeadMatrix HeadSensitivity(const Bundle& bundle, SpanReduction reduction) {
  const BundleManifest& m = bundle.manifest;
  if (bundle.activations.attention.empty()) {
    throw ValidationError(bundle.dir.string() + ": bundle carries no attention");
  }
  HeadMatrix out;
  try {
    out = HeadSensitivity(bundle.activations.attention, m.role_token_spans, reduction);
  } catch (const Error& e) {
    throw ValidationError(bundle.dir.string() + ": " + e.what());
  }
  if (m.causal) {
    const auto& A = bundle.activations.attention;
    for (int l = 0; l < m.n_layers; ++l) {
      for (int h = 0; h < m.n_heads; ++h) {
        if (Evidence(A, l, h, m.role_token_spans.np_head, m.role_token_spans.verb2,
                     SpanReduction::kMax) != 0.0) {
          throw ValidationError(bundle.dir.string() +
                                ": causal bundle has attention from np to a later verb");
        }
      }
    }
  }
  return out;
}

HeadMatrix AggregateMaps(std::span<const HeadMatrix> per_item) {
  if (per_item.empty()) throw ValidationError("aggregate: no item matrices");
  HeadMatrix out(per_item[0].n_layers, per_item[0].n_heads);
  for (const HeadMatrix& m : per_item) {
    if (m.n_layers != out.n_layers || m.n_heads != out.n_heads) {
      throw ValidationError("aggregate: shape mismatch between item matrices");
    }
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += m.values[i];
  }
  const double inv = 1.0 / double(per_item.size());
  for (double& v : out.values) v *= inv;
  return out;
}

HeadMatrix ThresholdedDifference(const HeadMatrix& present, const HeadMatrix& absent,
                                 double threshold) {
  if (present.n_layers != absent.n_layers || present.n_heads != absent.n_heads) {
    throw ValidationError("difference map: shape mismatch");
  }
  HeadMatrix out(present.n_layers, present.n_heads);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double d = present.values[i] - absent.values[i];
    out.values[i] = std::abs(d) < threshold ? 0.0 : d;
  }
  return out;
}

CsvTable HeadMatrixTable(const HeadMatrix& m) {
  CsvTable t;
  t.header = {"layer", "head", "value"};
  for (int l = 0; l < m.n_layers; ++l) {
    for (int h = 0; h < m.n_heads; ++h) {
      t.rows.push_back({std::to_string(l), std::to_string(h), FormatShortest(m.at(l, h))});
    }
  }
  return t;
}

HeadMatrix HeadMatrixFromTable(const CsvTable& table, const std::string& where) {
  struct Cell {
    int layer;
    int head;
    double value;
  };
  std::vector<Cell> cells;
  int layers = 0;
  int heads = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string w = where + " row " + std::to_string(r + 2);
    const Cell c{ParseInt(table.Cell(r, "layer"), w), ParseInt(table.Cell(r, "head"), w),
                 ParseDouble(table.Cell(r, "value"), w)};
    if (c.layer < 0 || c.head < 0) throw ValidationError(w + ": negative layer or head index");
    layers = std::max(layers, c.layer + 1);
    heads = std::max(heads, c.head + 1);
    cells.push_back(c);
  }
  if (static_cast<std::size_t>(layers) * heads != cells.size()) {
    throw ValidationError(where + ": heatmap table is not a full layer x head grid");
  }
  HeadMatrix m(layers, heads);
  std::vector<bool> seen(cells.size(), false);
  for (const Cell& c : cells) {
    const std::size_t i = static_cast<std::size_t>(c.layer) * heads + c.head;
    if (seen[i]) {
      throw ValidationError(where + ": duplicate cell (" + std::to_string(c.layer) + ", " +
                            std::to_string(c.head) + ")");
    }
    seen[i] = true;
    m.values[i] = c.value;
  }
  return m;
}

}  // namespace gpprobe
