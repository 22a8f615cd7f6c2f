#include "gpprobe/probe.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gpprobe/error.h"
#include "gpprobe/kernels.h"
#include "gpprobe/log.h"
#include "gpprobe/mst.h"
#include "json.hpp"

namespace gpprobe {

using nlohmann::json;

StructuralProbe::StructuralProbe(int rank, int hidden_dim, int layer,
                                 std::vector<double> matrix, TrainingConfig config)
    : rank_(rank),
      hidden_dim_(hidden_dim),
      layer_(layer),
      matrix_(std::move(matrix)),
      config_(config) {
  if (rank < 1 || rank > hidden_dim) {
    throw ValidationError("probe rank must satisfy 1 <= k <= hidden_dim (k=" +
                          std::to_string(rank) + ", d=" + std::to_string(hidden_dim) + ")");
  }
  if (layer < 0) throw ValidationError("probe layer must be non-negative");
  if (matrix_.size() != static_cast<std::size_t>(rank) * hidden_dim) {
    throw ValidationError("probe matrix size does not match rank x hidden_dim");
  }
  for (double v : matrix_) {
    if (!std::isfinite(v)) throw ValidationError("probe matrix has non-finite entries");
  }
  config_.rank = rank;
  config_.layer = layer;
}

StructuralProbe StructuralProbe::RandomInit(int rank, int hidden_dim, int layer,
                                            const TrainingConfig& config) {
  if (hidden_dim < 1) throw ValidationError("hidden_dim must be positive");
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(double(hidden_dim)));
  std::vector<double> m(static_cast<std::size_t>(std::max(rank, 0)) * hidden_dim);
  for (double& v : m) v = normal(rng);
  return StructuralProbe(rank, hidden_dim, layer, std::move(m), config);
}

double StructuralProbe::Distance(std::span<const double> a,
                                 std::span<const double> b) const {
  if (a.size() != static_cast<std::size_t>(hidden_dim_) || b.size() != a.size()) {
    throw ValidationError("probe distance: vector length does not match hidden_dim");
  }
  std::vector<double> diff(a.begin(), a.end());
  kernels::Axpy(-1.0, b, diff);
  std::vector<double> proj(rank_);
  kernels::MatVec(matrix_, rank_, hidden_dim_, diff, proj);
  return kernels::Dot(proj, proj);
}

WordMatrix StructuralProbe::Project(const WordMatrix& words) const {
  if (words.dim != hidden_dim_) {
    throw ValidationError("probe/bundle dimension mismatch: probe expects " +
                          std::to_string(hidden_dim_) + ", got " +
                          std::to_string(words.dim));
  }
  WordMatrix out(words.n, rank_);
  for (int i = 0; i < words.n; ++i) {
    kernels::MatVec(matrix_, rank_, hidden_dim_, words.row(i), out.row(i));
  }
  return out;
}

std::vector<double> StructuralProbe::DistanceMatrix(const WordMatrix& words) const {
  const WordMatrix p = Project(words);
  const int n = words.n;
  std::vector<double> d(static_cast<std::size_t>(n) * n, 0.0);
  const auto& k = kernels::Active();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = k.squared_distance(p.row(i).data(), p.row(j).data(), rank_);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return d;
}

TrainingSentence MakeTrainingSentence(WordMatrix words, const GoldTree& gold) {
  if (words.n != gold.n_words) {
    throw ValidationError("sentence '" + gold.sentence_id + "': " +
                          std::to_string(words.n) + " word vectors for " +
                          std::to_string(gold.n_words) + " tree words");
  }
  TrainingSentence s;
  s.words = std::move(words);
  s.target.assign(gold.distances.begin(), gold.distances.end());
  return s;
}

double SentenceLoss(const StructuralProbe& probe, const TrainingSentence& s,
                    std::span<double> gradient) {
  const int n = s.words.n;
  const int k = probe.rank();
  const int d = probe.hidden_dim();
  const WordMatrix p = probe.Project(s.words);
  const auto& kt = kernels::Active();

  std::vector<double> sign(static_cast<std::size_t>(n) * n, 0.0);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dist = kt.squared_distance(p.row(i).data(), p.row(j).data(), k);
      const double r = dist - s.target[i * n + j];
      loss += 2.0 * std::abs(r);
      const double sg = (r > 0.0) - (r < 0.0);
      sign[i * n + j] = sg;
      sign[j * n + i] = sg;
    }
  }
  const double scale = 1.0 / (double(n) * n);
  loss *= scale;

  if (!gradient.empty()) {
    // dL/dB = (4/n^2) sum_i p_i q_i^T,  q_i = r_i h_i - sum_j s_ij h_j,
    // r_i = sum_j s_ij; this is the ordered-pair sum of
    // s_ij * 2 (p_i - p_j)(h_i - h_j)^T folded by symmetry.
    std::fill(gradient.begin(), gradient.end(), 0.0);
    std::vector<double> q(d);
    for (int i = 0; i < n; ++i) {
      std::fill(q.begin(), q.end(), 0.0);
      double row_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const double sg = sign[i * n + j];
        if (sg == 0.0) continue;
        row_sum += sg;
        kt.axpy(-sg, s.words.row(j).data(), q.data(), d);
      }
      kt.axpy(row_sum, s.words.row(i).data(), q.data(), d);
      const auto pi = p.row(i);
      for (int r = 0; r < k; ++r) {
        const double c = 4.0 * scale * pi[r];
        if (c != 0.0) kt.axpy(c, q.data(), gradient.data() + static_cast<std::size_t>(r) * d, d);
      }
    }
  }
  return loss;
}

TrainResult TrainProbe(const std::vector<TrainingSentence>& sentences, int hidden_dim,
                       const TrainingConfig& config) {
  if (sentences.empty()) throw ValidationError("train_probe: empty training set");
  if (config.epochs < 1) throw ValidationError("train_probe: epochs must be >= 1");
  if (config.batch_size < 1) throw ValidationError("train_probe: batch_size must be >= 1");
  if (!(config.learning_rate > 0.0)) {
    throw ValidationError("train_probe: learning_rate must be positive");
  }
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    if (s.words.dim != hidden_dim) {
      throw ValidationError("train_probe: dimension mismatch in sentence " +
                            std::to_string(i));
    }
    if (s.words.n < 2) {
      throw ValidationError("train_probe: sentence " + std::to_string(i) +
                            " has fewer than 2 words");
    }
    if (s.target.size() != static_cast<std::size_t>(s.words.n) * s.words.n) {
      throw ValidationError("train_probe: target size mismatch in sentence " +
                            std::to_string(i));
    }
  }

  TrainResult result{StructuralProbe::RandomInit(config.rank, hidden_dim, config.layer, config),
                     {}};
  StructuralProbe& probe = result.probe;
  auto B = probe.mutable_matrix();
  std::vector<double> grad(B.size());
  std::vector<double> batch_grad(B.size());
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  // Separate stream from the init so changing epochs does not alter B0.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const double loss = SentenceLoss(probe, sentences[order[b]], grad);
        if (!std::isfinite(loss)) {
          throw ValidationError("train_probe: loss diverged (non-finite) at epoch " +
                                std::to_string(epoch + 1) + "; lower the learning rate");
        }
        total += loss;
        kernels::Axpy(1.0, grad, batch_grad);
      }
      kernels::Axpy(-lr / double(stop - start), batch_grad, B);
    }
    const double mean = total / double(sentences.size());
    for (double v : B) {
      if (!std::isfinite(v)) {
        throw ValidationError("train_probe: probe diverged (non-finite B) at epoch " +
                              std::to_string(epoch + 1));
      }
    }
    result.epoch_losses.push_back(mean);
    log::Debug("train_probe epoch ", epoch + 1, " loss ", mean, " lr ", lr);
    if (mean < best) {
      best = mean;
    } else {
      lr *= config.lr_decay;
    }
  }
  return result;
}

double Uuas(const std::vector<Edge>& predicted, const std::vector<Edge>& gold, int n) {
  if (n < 1) throw ValidationError("uuas: empty sentence");
  if (n == 1) return 1.0;
  std::set<Edge> g;
  for (const Edge& e : gold) g.insert(Edge::Make(e.a, e.b));
  std::set<Edge> seen;
  int hit = 0;
  for (const Edge& e : predicted) {
    const Edge u = Edge::Make(e.a, e.b);
    if (g.contains(u) && seen.insert(u).second) ++hit;
  }
  return double(hit) / double(n - 1);
}

double Uuas(const std::vector<Edge>& predicted, const GoldTree& gold) {
  for (const Edge& e : predicted) {
    if (std::max(e.a, e.b) >= gold.n_words || std::min(e.a, e.b) < 0) {
      throw ValidationError("uuas: word-count mismatch");
    }
  }
  if (!predicted.empty() && static_cast<int>(predicted.size()) != gold.n_words - 1) {
    throw ValidationError("uuas: word-count mismatch");
  }
  return Uuas(predicted, gold.edges, gold.n_words);
}

LayerSweep SweepLayers(int n_layers_with_embeddings, int hidden_dim,
                       const std::function<std::vector<TrainingSentence>(int)>& data,
                       const std::vector<GoldTree>& gold, double dev_fraction,
                       const TrainingConfig& config) {
  if (n_layers_with_embeddings < 1) throw ValidationError("layer sweep needs >= 1 layer");
  const std::size_t n = gold.size();
  std::size_t n_dev = static_cast<std::size_t>(std::floor(double(n) * dev_fraction));
  if (n_dev == 0 && n >= 2) n_dev = 1;
  if (n_dev >= n) throw ValidationError("layer sweep needs at least one training sentence");
  const std::size_t n_train = n - n_dev;

  LayerSweep sweep;
  double best_score = -1.0;
  for (int layer = 0; layer < n_layers_with_embeddings; ++layer) {
    std::vector<TrainingSentence> all = data(layer);
    if (all.size() != n) throw ValidationError("layer sweep: data/gold size mismatch");
    std::vector<TrainingSentence> train(all.begin(), all.begin() + n_train);
    TrainingConfig c = config;
    c.layer = layer;
    TrainResult r = TrainProbe(train, hidden_dim, c);
    double score = 0.0;
    for (std::size_t i = n_train; i < n; ++i) {
      const auto d = r.probe.DistanceMatrix(all[i].words);
      score += Uuas(DecodeMst(d, all[i].words.n), gold[i]);
    }
    score = n_dev > 0 ? score / double(n_dev) : 0.0;
    sweep.dev_uuas.push_back(score);
    log::Info("layer ", layer, " dev UUAS ", score);
    if (score > best_score) {
      best_score = score;
      sweep.best_layer = layer;
      sweep.best = std::move(r);
    }
  }
  return sweep;
}

WordMatrix PoolWords(const FloatTensor& hidden, int layer,
                     std::span<const int> word_of_token) {
  if (hidden.rank() != 3) throw ValidationError("hidden tensor must be rank 3");
  if (layer < 0 || static_cast<std::size_t>(layer) >= hidden.dim(0)) {
    throw ValidationError("probe layer " + std::to_string(layer) +
                          " not present in bundle (layers 0.." +
                          std::to_string(hidden.dim(0) - 1) + ")");
  }
  const std::size_t T = hidden.dim(1);
  const int D = static_cast<int>(hidden.dim(2));
  if (word_of_token.size() != T) throw ValidationError("word_of_token length != T");
  const int n = T == 0 ? 0 : word_of_token.back() + 1;
  WordMatrix out(n, D);
  std::vector<int> counts(n, 0);
  const auto& k = kernels::Active();
  for (std::size_t t = 0; t < T; ++t) {
    const int w = word_of_token[t];
    const auto row = hidden.Row({static_cast<std::size_t>(layer), t});
    k.accumulate_f32(row.data(), out.row(w).data(), D);
    ++counts[w];
  }
  for (int w = 0; w < n; ++w) {
    if (counts[w] == 0) throw ValidationError("word " + std::to_string(w) + " owns no tokens");
    const double inv = 1.0 / counts[w];
    for (double& v : out.row(w)) v *= inv;
  }
  return out;
}

std::string_view ToString(AttachmentVerdict v) {
  switch (v) {
    case AttachmentVerdict::kMisinterpretation: return "misinterpretation";
    case AttachmentVerdict::kCorrect: return "correct";
    default: return "other";
  }
}

AttachmentVerdict JudgeAttachment(const std::vector<Edge>& tree, int n,
                                  const RoleWords& roles) {
  const auto in_range = [n](int w) { return w >= 0 && w < n; };
  if (!in_range(roles.verb1) || !in_range(roles.np_head)) return AttachmentVerdict::kOther;
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : tree) {
    if (!in_range(e.a) || !in_range(e.b)) return AttachmentVerdict::kOther;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<int> dist(n, -1);
  dist[roles.np_head] = 0;
  std::deque<int> queue{roles.np_head};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  const int to_v1 = dist[roles.verb1];
  // A verb2 beyond the prefix counts as infinitely far.
  const int to_v2 = in_range(roles.verb2) ? dist[roles.verb2] : std::numeric_limits<int>::max();
  if (to_v1 < 0 || to_v2 < 0) return AttachmentVerdict::kOther;
  if (to_v2 < to_v1) return AttachmentVerdict::kCorrect;
  if (to_v1 < to_v2) return AttachmentVerdict::kMisinterpretation;
  return AttachmentVerdict::kOther;
}

ParseTreeSnapshot ExtractSnapshot(const StructuralProbe& probe, const Bundle& bundle,
                                  const GardenPathItem& item) {
  const BundleManifest& m = bundle.manifest;
  ParseTreeSnapshot snap;
  snap.item_id = item.id;
  snap.variant = m.variant;
  snap.prefix_index = m.prefix_index;

  if (m.hidden_dim != probe.hidden_dim()) {
    throw ValidationError("probe/bundle dimension mismatch: probe hidden_dim " +
                          std::to_string(probe.hidden_dim()) + ", bundle " +
                          std::to_string(m.hidden_dim) + " (" + bundle.dir.string() + ")");
  }
  if (probe.layer() > m.n_layers) {
    throw ValidationError("probe layer " + std::to_string(probe.layer()) +
                          " not present in bundle with " + std::to_string(m.n_layers) +
                          " layers");
  }
  if (bundle.activations.hidden.empty()) {
    throw ValidationError(bundle.dir.string() + ": bundle carries no hidden states");
  }

  const auto variants = RenderVariants(item);
  const auto all_words = SplitWhitespace(Select(variants, m.variant).full_text);
  const int n = m.num_words();
  if (n > static_cast<int>(all_words.size())) {
    throw ValidationError(bundle.dir.string() + ": bundle has more words than the item");
  }
  snap.words.assign(all_words.begin(), all_words.begin() + n);
  if (n < 2) return snap;

  const WordMatrix words = PoolWords(bundle.activations.hidden, probe.layer(), m.word_of_token);
  snap.distances = probe.DistanceMatrix(words);
  snap.edges = DecodeMst(snap.distances, n);
  snap.verdict = JudgeAttachment(snap.edges, n, item.roles);
  return snap;
}

namespace {
constexpr const char* kProbeFormat = "gpprobe-probe-v1";
}

void WriteProbe(const StructuralProbe& probe, const std::filesystem::path& path) {
  const TrainingConfig& c = probe.config();
  json header = {
      {"format", kProbeFormat},
      {"k", probe.rank()},
      {"layer", probe.layer()},
      {"hidden_dim", probe.hidden_dim()},
      {"seed", c.seed},
      {"config",
       {{"learning_rate", c.learning_rate},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"lr_decay", c.lr_decay},
        {"seed", c.seed}}},
  };
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write probe " + path.string());
  out << header.dump() << '\n';
  for (double v : probe.matrix()) {
    float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    out.write(reinterpret_cast<const char*>(&u), 4);
  }
  if (!out) throw IoError("short write: " + path.string());
}

StructuralProbe ReadProbe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open probe " + path.string());
  std::string header_line;
  std::getline(in, header_line);
  json h;
  try {
    h = json::parse(header_line);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed probe header: " + e.what());
  }
  if (h.value("format", "") != kProbeFormat) {
    throw ValidationError(path.string() + ": not a probe checkpoint");
  }
  TrainingConfig c;
  int k = 0, layer = 0, d = 0;
  try {
    k = h.at("k").get<int>();
    layer = h.at("layer").get<int>();
    d = h.at("hidden_dim").get<int>();
    c.seed = h.value("seed", std::uint64_t{0});
    if (h.contains("config")) {
      const json& cj = h.at("config");
      c.learning_rate = cj.value("learning_rate", c.learning_rate);
      c.epochs = cj.value("epochs", c.epochs);
      c.batch_size = cj.value("batch_size", c.batch_size);
      c.lr_decay = cj.value("lr_decay", c.lr_decay);
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed probe header: " + e.what());
  }
  if (k < 1 || d < 1) throw ValidationError(path.string() + ": bad probe dimensions");
  const std::size_t count = static_cast<std::size_t>(k) * d;
  std::vector<double> m(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t u;
    if (!in.read(reinterpret_cast<char*>(&u), 4)) {
      throw ValidationError(path.string() + ": probe matrix truncated");
    }
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    float f;
    std::memcpy(&f, &u, 4);
    m[i] = f;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError(path.string() + ": trailing bytes after probe matrix");
  }
  return StructuralProbe(k, d, layer, std::move(m), c);
}

}  // namespace gpprobe
