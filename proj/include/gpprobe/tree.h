#pragma once

#include <string>
#include <vector>

namespace gpprobe {

// Undirected edge, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;

  static Edge Make(int i, int j) { return i < j ? Edge{i, j} : Edge{j, i}; }
  auto operator<=>(const Edge&) const = default;
};

// Undirected tree over words 0..n-1 with its all-pairs path lengths.
struct GoldTree {
  std::string sentence_id;
  int n_words = 0;
  std::vector<Edge> edges;
  std::vector<int> distances;  // row-major [n_words, n_words]

  int Distance(int i, int j) const { return distances[i * n_words + j]; }
};

// Builds a GoldTree, checking that `edges` form a spanning tree. Edges are
// normalized and sorted.
GoldTree MakeGoldTree(std::string sentence_id, int n_words, std::vector<Edge> edges);

// All-pairs edge counts by BFS; -1 for unreachable pairs.
std::vector<int> TreePathLengths(int n, const std::vector<Edge>& edges);

bool IsSpanningTree(int n, const std::vector<Edge>& edges);

}  // namespace gpprobe
