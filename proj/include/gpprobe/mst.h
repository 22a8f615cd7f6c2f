#pragma once

#include <span>
#include <vector>

#include "gpprobe/tree.h"

namespace gpprobe {

// Minimum spanning tree over a symmetric, non-negative, zero-diagonal
// row-major [n, n] distance matrix (Prim). Among equal-weight candidate
// edges the lexicographically smallest (min(i,j), max(i,j)) is taken, so the
// output is a deterministic function of the input ordering of weights.
// Returned edges are sorted.
std::vector<Edge> DecodeMst(std::span<const double> distances, int n);

double TreeWeight(std::span<const double> distances, int n,
                  const std::vector<Edge>& edges);

}  // namespace gpprobe
