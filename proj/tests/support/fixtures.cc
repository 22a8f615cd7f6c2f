#include "fixtures.h"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace gpprobe::testing {

using nlohmann::ordered_json;

TempDir::TempDir() {
  static int counter = 0;
  std::random_device rd;
  const fs::path base = fs::temp_directory_path();
  for (;;) {
    path_ = base / ("gpprobe_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    if (fs::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::uint64_t Fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void WriteFloat32(const fs::path& path, std::span<const float> values) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

namespace {

ordered_json Span(TokenSpan s) {
  if (s.empty()) return ordered_json::array();
  return ordered_json::array({s.begin, s.end});
}

}  // namespace

std::string ManifestJson(const BundleManifest& m) {
  ordered_json j;
  j["model_id"] = m.model_id;
  j["item_id"] = m.item_id;
  j["variant"] = std::string(ToString(m.variant));
  j["prefix_index"] = m.prefix_index;
  j["n_layers"] = m.n_layers;
  j["n_heads"] = m.n_heads;
  j["hidden_dim"] = m.hidden_dim;
  j["causal"] = m.causal;
  j["tokens"] = m.tokens;
  j["word_of_token"] = m.word_of_token;
  j["role_words"] = {{"verb1", m.role_words.verb1},
                     {"np_head", m.role_words.np_head},
                     {"verb2", m.role_words.verb2}};
  j["role_token_spans"] = {{"verb1", Span(m.role_token_spans.verb1)},
                           {"np_head", Span(m.role_token_spans.np_head)},
                           {"verb2", Span(m.role_token_spans.verb2)}};
  j["payload"] = {{"hidden", m.payload.hidden},
                  {"attention", m.payload.attention},
                  {"token_logprob", m.payload.token_logprob},
                  {"answer", m.payload.answer}};
  const int T = m.num_tokens();
  j["shapes"] = {{"hidden", {m.n_layers + 1, T, m.hidden_dim}},
                 {"attention", {m.n_layers, m.n_heads, T, T}},
                 {"token_logprob", {T}}};
  return j.dump(2);
}

void WriteBundle(const fs::path& dir, const BundleFiles& f) {
  fs::create_directories(dir);
  WriteText(dir / "manifest.json", ManifestJson(f.manifest));
  if (f.manifest.payload.hidden) WriteFloat32(dir / "hidden.f32", f.hidden);
  if (f.manifest.payload.attention) WriteFloat32(dir / "attn.f32", f.attention);
  if (f.token_logprob) WriteFloat32(dir / "token_logprob.f32", *f.token_logprob);
  if (f.answer) {
    ordered_json a;
    a["p_yes"] = f.answer->p_yes;
    a["p_no"] = f.answer->p_no;
    if (f.answer_correct) {
      a["correct"] = {{"p_yes", f.answer_correct->p_yes}, {"p_no", f.answer_correct->p_no}};
    }
    WriteText(dir / "answer.json", a.dump());
  }
}

fs::path BundleDir(const fs::path& root, const std::string& item, Variant v, int prefix) {
  return root / item / std::string(ToString(v)) / PrefixDirName(prefix);
}

Tokenized Tokenize(const std::vector<std::string>& words) {
  Tokenized t;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::string& word = words[w];
    if (word.size() > 1 && word.back() == ',') {
      t.tokens.push_back(word.substr(0, word.size() - 1));
      t.word_of_token.push_back(static_cast<int>(w));
      t.tokens.push_back(",");
    } else {
      t.tokens.push_back(word);
    }
    t.word_of_token.push_back(static_cast<int>(w));
  }
  return t;
}

namespace {

TokenSpan SpanOfWord(const std::vector<int>& word_of_token, int word) {
  TokenSpan s{-1, -1};
  for (int t = 0; t < static_cast<int>(word_of_token.size()); ++t) {
    if (word_of_token[t] != word) continue;
    if (s.begin < 0) s.begin = t;
    s.end = t + 1;
  }
  if (s.begin < 0) return {};
  return s;
}

std::mt19937_64 Rng(const SyntheticModel& model, const std::string& key) {
  return std::mt19937_64(model.seed ^ Fnv1a(model.model_id + "|" + key));
}

}  // namespace

BundleFiles MakeSyntheticBundle(const GardenPathItem& item, Variant variant, int prefix,
                                const SyntheticModel& model) {
  const auto variants = RenderVariants(item);
  const StimulusVariant& sv = Select(variants, variant);
  const auto all_words = SplitWhitespace(sv.full_text);
  const auto words = SplitWhitespace(sv.prefixes[prefix - 1]);
  const Tokenized tok = Tokenize(words);
  const int T = static_cast<int>(tok.tokens.size());
  const int L = model.n_layers;
  const int H = model.n_heads;
  const int D = model.hidden_dim;
  const std::string base = item.id + "|" + std::string(ToString(variant));

  BundleFiles f;
  BundleManifest& m = f.manifest;
  m.model_id = model.model_id;
  m.item_id = item.id;
  m.variant = variant;
  m.prefix_index = prefix;
  m.n_layers = L;
  m.n_heads = H;
  m.hidden_dim = D;
  m.causal = model.causal;
  m.tokens = tok.tokens;
  m.word_of_token = tok.word_of_token;
  m.role_words = item.roles;
  m.role_token_spans = {SpanOfWord(tok.word_of_token, item.roles.verb1),
                        SpanOfWord(tok.word_of_token, item.roles.np_head),
                        SpanOfWord(tok.word_of_token, item.roles.verb2)};
  m.payload.token_logprob = model.with_logprob;

  f.hidden.resize(static_cast<std::size_t>(L + 1) * T * D);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  for (int l = 0; l <= L; ++l) {
    for (int t = 0; t < T; ++t) {
      // Causal states depend only on the left context, which prefixes share.
      auto rng = Rng(model, base + "|h|" + std::to_string(l) + "|" + std::to_string(t) +
                                (model.causal ? "" : "|" + std::to_string(prefix)));
      for (int d = 0; d < D; ++d) f.hidden[(static_cast<std::size_t>(l) * T + t) * D + d] = normal(rng);
    }
  }

  f.attention.assign(static_cast<std::size_t>(L) * H * T * T, 0.0f);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int l = 0; l < L; ++l) {
    for (int h = 0; h < H; ++h) {
      for (int r = 0; r < T; ++r) {
        auto rng = Rng(model, base + "|a|" + std::to_string(prefix) + "|" + std::to_string(l) +
                                  "|" + std::to_string(h) + "|" + std::to_string(r));
        const int cols = model.causal ? r + 1 : T;
        std::vector<double> w(cols);
        double sum = 0.0;
        for (double& x : w) sum += (x = unit(rng));
        float* row = &f.attention[((static_cast<std::size_t>(l) * H + h) * T + r) * T];
        for (int c = 0; c < cols; ++c) row[c] = static_cast<float>(w[c] / sum);
      }
    }
  }

  if (model.with_logprob) {
    std::vector<float> lp(T);
    for (int t = 0; t < T; ++t) {
      auto rng = Rng(model, base + "|lp|" + std::to_string(t));
      double v = -(0.3 + 2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
      if (variant == Variant::kCommaAbsent && item.ChunkOfWord(tok.word_of_token[t]) == 3) {
        v -= 2.0;
      }
      lp[t] = static_cast<float>(v);
    }
    f.token_logprob = lp;
  }

  auto rng = Rng(model, base + "|ans|" + std::to_string(prefix));
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  const bool present = variant == Variant::kCommaPresent;
  double yes = prefix < 2 ? 0.45 : (prefix < 4 ? 0.8 : (present ? 0.3 : 0.6));
  yes += jitter(rng);
  const double mass = 0.7 + jitter(rng);
  f.answer = AnswerProbs{mass * yes, mass * (1.0 - yes)};
  if (model.with_correct_answer) {
    const double c = prefix < 4 ? 0.3 + jitter(rng) : (present ? 0.75 : 0.55) + jitter(rng);
    f.answer_correct = AnswerProbs{mass * c, mass * (1.0 - c)};
  }
  (void)all_words;
  return f;
}

void WriteSyntheticBundles(const fs::path& root, const std::vector<GardenPathItem>& corpus,
                           const SyntheticModel& model) {
  for (const auto& item : corpus) {
    for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
      for (int k = 1; k <= kNumChunks; ++k) {
        WriteBundle(BundleDir(root, item.id, v, k), MakeSyntheticBundle(item, v, k, model));
      }
    }
  }
}

std::vector<Edge> PrueferTree(int n, const std::vector<int>& seq) {
  if (n == 2) return {Edge{0, 1}};
  std::vector<int> degree(n, 1);
  for (int s : seq) ++degree[s];
  std::vector<Edge> edges;
  for (int s : seq) {
    for (int leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1) {
        edges.push_back(Edge::Make(leaf, s));
        --degree[leaf];
        --degree[s];
        break;
      }
    }
  }
  int u = -1;
  for (int i = 0; i < n; ++i) {
    if (degree[i] != 1) continue;
    if (u < 0) {
      u = i;
    } else {
      edges.push_back(Edge::Make(u, i));
      break;
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<Edge> RandomTree(int n, std::mt19937_64& rng) {
  if (n < 2) return {};
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> seq(n - 2);
  for (int& s : seq) s = pick(rng);
  return PrueferTree(n, seq);
}

std::vector<std::vector<Edge>> AllLabeledTrees(int n) {
  if (n < 2) return {{}};
  std::vector<std::vector<Edge>> out;
  std::vector<int> seq(n - 2, 0);
  for (;;) {
    out.push_back(PrueferTree(n, seq));
    int i = 0;
    while (i < n - 2 && ++seq[i] == n) seq[i++] = 0;
    if (i == n - 2) break;
  }
  return out;
}

double BruteForceMstWeight(const std::vector<double>& distances, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tree : AllLabeledTrees(n)) {
    double w = 0.0;
    for (const Edge& e : tree) w += distances[e.a * n + e.b];
    best = std::min(best, w);
  }
  return n < 2 ? 0.0 : best;
}

PlantedTreebankPaths WritePlantedTreebank(const fs::path& dir, int n_sentences, int min_words,
                                          int max_words, const SyntheticModel& model,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> length(min_words, max_words);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int D = model.hidden_dim;
  const int L = model.n_layers;
  PlantedTreebankPaths paths{dir / "treebank.conllu", dir / "activations"};
  std::string conllu;
  for (int s = 0; s < n_sentences; ++s) {
    const int n = length(rng);
    const auto edges = RandomTree(n, rng);
    // Orient away from word 0 to obtain heads.
    std::vector<std::vector<int>> adj(n);
    for (const Edge& e : edges) {
      adj[e.a].push_back(e.b);
      adj[e.b].push_back(e.a);
    }
    std::vector<int> parent(n, -1);
    std::vector<int> order{0};
    std::vector<bool> seen(n, false);
    seen[0] = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (int v : adj[order[i]]) {
        if (!seen[v]) {
          seen[v] = true;
          parent[v] = order[i];
          order.push_back(v);
        }
      }
    }
    const std::string id = "planted-" + std::to_string(s);
    conllu += "# sent_id = " + id + "\n";
    for (int i = 0; i < n; ++i) {
      conllu += std::to_string(i + 1) + "\tw" + std::to_string(i) + "\t_\t_\t_\t_\t" +
                std::to_string(parent[i] + 1) + "\t_\t_\t_\n";
    }
    conllu += "\n";

    // Word vectors: sum of edge directions from the root, scaled so that a
    // single edge has unit expected squared length.
    std::vector<std::vector<double>> x(n, std::vector<double>(D, 0.0));
    for (std::size_t i = 1; i < order.size(); ++i) {
      const int v = order[i];
      x[v] = x[parent[v]];
      for (int d = 0; d < D; ++d) x[v][d] += normal(rng) / std::sqrt(static_cast<double>(D));
    }
    std::vector<float> hidden(static_cast<std::size_t>(L + 1) * n * D);
    for (int l = 0; l <= L; ++l) {
      for (int i = 0; i < n; ++i) {
        for (int d = 0; d < D; ++d) {
          const double v = l == model.n_layers / 2 ? x[i][d] : normal(rng);
          hidden[(static_cast<std::size_t>(l) * n + i) * D + d] = static_cast<float>(v);
        }
      }
    }
    ordered_json j;
    j["model_id"] = model.model_id;
    j["n_layers"] = L;
    j["hidden_dim"] = D;
    std::vector<std::string> tokens;
    std::vector<int> wot;
    for (int i = 0; i < n; ++i) {
      tokens.push_back("w" + std::to_string(i));
      wot.push_back(i);
    }
    j["tokens"] = tokens;
    j["word_of_token"] = wot;
    j["shapes"] = {{"hidden", {L + 1, n, D}}};
    WriteText(paths.activations / id / "manifest.json", j.dump());
    WriteFloat32(paths.activations / id / "hidden.f32", hidden);
  }
  WriteText(paths.treebank, conllu);
  return paths;
}

fs::path SourceDir() { return GPPROBE_SOURCE_DIR; }

std::vector<GardenPathItem> SampleCorpus() {
  return LoadCorpus(SourceDir() / "data" / "sample_corpus.jsonl");
}

void WriteReportFixture(const fs::path& root) {
  WriteText(root / "GPT-2" / "shift.csv",
                     "model,variant,stage,n_items,n_correct,percent\n"
                     "gpt2,comma_absent,chunks_1_4,24,3,12.5\n"
                     "gpt2,comma_absent,chunks_1_5,24,4,16.666666666666668\n"
                     "gpt2,comma_present,chunks_1_4,24,11,45.833333333333336\n"
                     "gpt2,comma_present,chunks_1_5,24,12,50\n");
  WriteText(root / "RoBERTa-large" / "shift.csv",
                     "model,variant,stage,n_items,n_correct,percent\n"
                     "r,comma_absent,chunks_1_4,24,7,29.166666666666668\n"
                     "r,comma_absent,chunks_1_5,24,11,45.833333333333336\n"
                     "r,comma_present,chunks_1_4,24,12,50\n"
                     "r,comma_present,chunks_1_5,24,15,62.5\n");
  WriteText(root / "GPT-2" / "accuracy.csv",
                     "model,variant,accuracy_pct\ngpt2,comma_absent,16.666666666666668\n"
                     "gpt2,comma_present,50\n");
  std::string traj = "model,variant,chunk,mean_p_yes,mean_p_no,mean_p_yes_norm,n,excluded\n";
  for (int c = 1; c <= 5; ++c) {
    traj += "gpt2,comma_absent," + std::to_string(c) + ",0.4,0.2,0." + std::to_string(5 + c) + ",3,0\n";
    traj += "gpt2,comma_present," + std::to_string(c) + ",0.4,0.2,0." + std::to_string(6 - c) + ",3,0\n";
  }
  WriteText(root / "GPT-2" / "trajectory_mean.csv", traj);
  WriteText(root / "GPT-2" / "surprisal_mean.csv",
                     "model,variant,chunk,mean_bits,n_items\n"
                     "g,comma_absent,1,3.25,2\ng,comma_absent,2,4,2\ng,comma_absent,3,3,2\n"
                     "g,comma_absent,4,7.5,2\ng,comma_absent,5,2,2\n");
  WriteText(root / "GPT-2" / "heatmap_difference.csv",
                     "layer,head,value\n0,0,0.1\n0,1,-0.3\n1,0,0\n1,1,0.05\n");
}

}  // namespace gpprobe::testing
