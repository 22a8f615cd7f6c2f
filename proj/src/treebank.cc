#include "gpprobe/treebank.h"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gpprobe/error.h"
#include "gpprobe/log.h"

namespace gpprobe {

std::vector<int> TreePathLengths(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<int> dist(static_cast<std::size_t>(n) * n, -1);
  for (int s = 0; s < n; ++s) {
    int* row = dist.data() + static_cast<std::size_t>(s) * n;
    row[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

bool IsSpanningTree(int n, const std::vector<Edge>& edges) {
  if (n <= 0) return false;
  if (static_cast<int>(edges.size()) != n - 1) return false;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b) return false;
    const int ra = find(e.a);
    const int rb = find(e.b);
    if (ra == rb) return false;
    parent[ra] = rb;
  }
  return true;
}

GoldTree MakeGoldTree(std::string sentence_id, int n_words, std::vector<Edge> edges) {
  for (Edge& e : edges) e = Edge::Make(e.a, e.b);
  std::sort(edges.begin(), edges.end());
  if (!IsSpanningTree(n_words, edges)) {
    throw ValidationError("sentence '" + sentence_id + "': edges do not form a spanning tree");
  }
  GoldTree t;
  t.sentence_id = std::move(sentence_id);
  t.n_words = n_words;
  t.distances = TreePathLengths(n_words, edges);
  t.edges = std::move(edges);
  return t;
}

AnnotatedSentence MakeAnnotatedSentence(std::string id, std::vector<std::string> words,
                                        std::vector<int> heads) {
  const int n = static_cast<int>(words.size());
  const std::string who = "sentence '" + id + "': ";
  if (n == 0) throw ValidationError(who + "empty sentence");
  if (static_cast<int>(heads.size()) != n) {
    throw ValidationError(who + "heads and words differ in length");
  }
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (heads[i] < 0 || heads[i] > n) {
      throw ValidationError(who + "dangling head index " + std::to_string(heads[i]) +
                            " at word " + std::to_string(i + 1));
    }
    if (heads[i] == i + 1) {
      throw ValidationError(who + "cycle: word " + std::to_string(i + 1) +
                            " heads itself");
    }
    if (heads[i] == 0) ++roots;
  }
  if (roots == 0) throw ValidationError(who + "no root");
  if (roots > 1) throw ValidationError(who + "multiple roots");
  // Every word must reach the root by following heads.
  for (int i = 0; i < n; ++i) {
    int at = i + 1;
    for (int steps = 0; at != 0; ++steps) {
      if (steps > n) {
        throw ValidationError(who + "cycle through word " + std::to_string(i + 1));
      }
      at = heads[at - 1];
    }
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    if (heads[i] != 0) edges.push_back(Edge::Make(i, heads[i] - 1));
  }
  AnnotatedSentence s;
  s.tree = MakeGoldTree(id, n, std::move(edges));
  s.id = std::move(id);
  s.words = std::move(words);
  s.heads = std::move(heads);
  return s;
}

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> cols;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, '\t')) cols.push_back(cur);
  return cols;
}

}  // namespace

std::vector<AnnotatedSentence> ParseTreebank(std::string_view text,
                                             const std::string& source_name) {
  std::vector<AnnotatedSentence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::string pending_id;
  std::vector<std::string> words;
  std::vector<int> heads;
  int start_line = 0;

  const auto flush = [&] {
    if (words.empty()) return;
    std::string id = pending_id.empty()
                         ? "sent_" + std::to_string(out.size() + 1)
                         : pending_id;
    try {
      out.push_back(MakeAnnotatedSentence(std::move(id), std::move(words), std::move(heads)));
    } catch (const Error& e) {
      throw ValidationError(source_name + ":" + std::to_string(start_line) + ": " + e.what());
    }
    words.clear();
    heads.clear();
    pending_id.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string key = "# sent_id";
      if (line.rfind(key, 0) == 0) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
          pending_id = line.substr(eq + 1);
          pending_id.erase(0, pending_id.find_first_not_of(' '));
          pending_id.erase(pending_id.find_last_not_of(' ') + 1);
        }
      }
      continue;
    }
    const auto cols = SplitTabs(line);
    const std::string where = source_name + ":" + std::to_string(lineno);
    if (cols.size() < 3) throw ValidationError(where + ": expected ID, FORM and HEAD columns");
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      log::Warn(where, ": skipping multi-word or empty node '", id, "'");
      continue;
    }
    // Full CoNLL-U puts HEAD in column 7; the subset format uses column 3.
    const std::string& head_col = cols.size() >= 7 ? cols[6] : cols[2];
    int wid = 0;
    int head = 0;
    try {
      std::size_t used = 0;
      wid = std::stoi(id, &used);
      if (used != id.size()) throw std::invalid_argument(id);
      head = std::stoi(head_col, &used);
      if (used != head_col.size()) throw std::invalid_argument(head_col);
    } catch (const std::logic_error&) {
      throw ValidationError(where + ": non-integer ID or HEAD");
    }
    if (words.empty()) start_line = lineno;
    if (wid != static_cast<int>(words.size()) + 1) {
      throw ValidationError(where + ": word IDs must be consecutive from 1");
    }
    words.push_back(cols[1]);
    heads.push_back(head);
  }
  flush();
  return out;
}

std::vector<AnnotatedSentence> LoadTreebank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open treebank " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseTreebank(buf.str(), path.string());
}

}  // namespace gpprobe
