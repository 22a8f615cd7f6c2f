#include "gpprobe/pipeline.h"

#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "gpprobe/attention.h"
#include "gpprobe/bundle.h"
#include "gpprobe/error.h"
#include "gpprobe/interpret.h"
#include "gpprobe/log.h"
#include "gpprobe/mst.h"
#include "gpprobe/report.h"
#include "gpprobe/stats.h"
#include "gpprobe/surprisal.h"
#include "gpprobe/table.h"
#include "gpprobe/treebank.h"

namespace gpprobe::pipeline {

namespace fs = std::filesystem;

void ParallelFor(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

std::string ModelDirName(const std::string& model_id) {
  std::string out;
  for (char c : model_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                    c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "model";
  return out;
}

std::string ModelIdOf(const fs::path& bundle_root) {
  std::string model;
  for (const BundleRef& ref : ListBundles(bundle_root)) {
    const std::string text = ReadTextFile(ref.dir / "manifest.json");
    const BundleManifest m = ParseManifest(text, ref.dir.string());
    if (model.empty()) {
      model = m.model_id;
    } else if (m.model_id != model) {
      throw ValidationError("bundles under " + bundle_root.string() +
                            " mix models: '" + model + "' and '" + m.model_id + "'");
    }
  }
  return model;
}

fs::path ModelDir(const RunConfig& config) {
  return fs::path(config.report_out) / ModelDirName(ModelIdOf(config.bundle_root));
}

std::vector<GardenPathItem> ValidateCorpus(const fs::path& path) {
  auto items = LoadCorpus(path);
  if (items.empty()) throw ValidationError(path.string() + ": corpus is empty");
  return items;
}

namespace {

void Require(const std::string& value, const char* what) {
  if (value.empty()) throw ValidationError(std::string("missing required setting: ") + what);
}

struct ItemGroup {
  const GardenPathItem* item = nullptr;
  std::vector<BundleRef> refs;
};

// Bundles grouped by corpus item, in item-id order.
std::vector<ItemGroup> GroupBundles(const RunConfig& config,
                                    const std::vector<GardenPathItem>& corpus,
                                    const BundleFilter& filter) {
  std::map<std::string, const GardenPathItem*> by_id;
  for (const auto& item : corpus) by_id[item.id] = &item;
  std::vector<ItemGroup> groups;
  for (BundleRef& ref : ListBundles(config.bundle_root, filter)) {
    const auto it = by_id.find(ref.item_id);
    if (it == by_id.end()) {
      throw ValidationError(ref.dir.string() + ": item '" + ref.item_id +
                            "' is not in the corpus");
    }
    if (groups.empty() || groups.back().item != it->second) {
      groups.push_back({it->second, {}});
    }
    groups.back().refs.push_back(std::move(ref));
  }
  for (const auto& item : corpus) {
    bool found = false;
    for (const auto& g : groups) found = found || g.item == &item;
    if (!found) log::Warn("no bundles for corpus item '", item.id, "'");
  }
  return groups;
}

std::optional<Bundle> Load(const BundleRef& ref, const ReadOptions& options, bool lenient) {
  try {
    return ReadBundle(ref, options);
  } catch (const Error& e) {
    if (!lenient) throw;
    log::Warn("skipping bundle: ", e.what());
    return std::nullopt;
  }
}

void Write(StageOutput& out, const fs::path& path, const std::string& content) {
  WriteTextFile(path, content);
  out.files.push_back(path);
}

std::string Pct(int k, int n) { return FormatShortest(n > 0 ? 100.0 * k / n : 0.0); }

}  // namespace

TrainResult TrainProbeFromFiles(const RunConfig& config, int workers,
                                std::vector<double>* dev_uuas) {
  Require(config.treebank, "treebank (--treebank)");
  Require(config.activations, "activations (--activations)");
  const auto sentences = LoadTreebank(config.treebank);
  if (sentences.empty()) throw ValidationError("train_probe: empty training set");

  std::vector<HiddenStates> states(sentences.size());
  ParallelFor(static_cast<int>(sentences.size()), workers, [&](int i) {
    states[i] = ReadHiddenStates(fs::path(config.activations) / sentences[i].id);
    if (states[i].num_words() != static_cast<int>(sentences[i].words.size())) {
      throw ValidationError("sentence '" + sentences[i].id + "': activations cover " +
                            std::to_string(states[i].num_words()) + " words, treebank has " +
                            std::to_string(sentences[i].words.size()));
    }
  });
  const int hidden_dim = states[0].hidden_dim;
  const int n_layers = states[0].n_layers;
  for (const auto& s : states) {
    if (s.hidden_dim != hidden_dim || s.n_layers != n_layers) {
      throw ValidationError("train_probe: activations disagree on model dimensions");
    }
  }
  std::vector<GoldTree> gold;
  for (const auto& s : sentences) gold.push_back(s.tree);
  const auto data_for_layer = [&](int layer) {
    std::vector<TrainingSentence> out;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (sentences[i].words.size() < 2) continue;
      out.push_back(MakeTrainingSentence(
          PoolWords(states[i].hidden, layer, states[i].word_of_token), gold[i]));
    }
    return out;
  };

  TrainingConfig tc;
  tc.rank = config.probe_rank;
  tc.learning_rate = config.probe_lr;
  tc.epochs = config.probe_epochs;
  tc.seed = config.probe_seed;
  tc.batch_size = config.probe_batch_size;
  if (config.probe_layer) {
    tc.layer = *config.probe_layer;
    if (tc.layer < 0 || tc.layer > n_layers) {
      throw ValidationError("probe layer " + std::to_string(tc.layer) +
                            " outside 0.." + std::to_string(n_layers));
    }
    return TrainProbe(data_for_layer(tc.layer), hidden_dim, tc);
  }
  std::vector<GoldTree> multiword;
  for (const auto& g : gold) {
    if (g.n_words >= 2) multiword.push_back(g);
  }
  LayerSweep sweep = SweepLayers(n_layers + 1, hidden_dim, data_for_layer, multiword,
                                 config.probe_dev_fraction, tc);
  if (dev_uuas) *dev_uuas = sweep.dev_uuas;
  log::Info("selected probe layer ", sweep.best_layer);
  return std::move(sweep.best);
}

StageOutput ExtractTrees(const RunConfig& config, int workers) {
  Require(config.probe_path, "probe (--probe)");
  Require(config.bundle_root, "bundle root (--bundles)");
  Require(config.corpus, "corpus (--corpus)");
  const StructuralProbe probe = ReadProbe(config.probe_path);
  const auto corpus = ValidateCorpus(config.corpus);
  const auto groups = GroupBundles(config, corpus, {});
  const std::string model = ModelIdOf(config.bundle_root);

  std::vector<std::vector<ParseTreeSnapshot>> per_item(groups.size());
  ParallelFor(static_cast<int>(groups.size()), workers, [&](int i) {
    for (const BundleRef& ref : groups[i].refs) {
      auto b = Load(ref, {.load_hidden = true, .load_attention = false}, config.lenient);
      if (b) per_item[i].push_back(ExtractSnapshot(probe, *b, *groups[i].item));
    }
  });

  CsvTable trees;
  trees.header = {"model", "item", "variant", "prefix", "n_words", "edges", "verdict"};
  // counts[variant][stage] = (correct, total), stage 0 = prefix 4, 1 = prefix 5
  int correct[2][2] = {{0, 0}, {0, 0}};
  int total[2][2] = {{0, 0}, {0, 0}};
  for (const auto& snaps : per_item) {
    for (const auto& s : snaps) {
      std::string edges;
      for (const Edge& e : s.edges) {
        if (!edges.empty()) edges += ' ';
        edges += std::to_string(e.a) + "-" + std::to_string(e.b);
      }
      trees.rows.push_back({model, s.item_id, std::string(ToString(s.variant)),
                            std::to_string(s.prefix_index), std::to_string(s.words.size()),
                            edges, std::string(ToString(s.verdict))});
      if (s.prefix_index >= 4) {
        const int v = s.variant == Variant::kCommaPresent ? 1 : 0;
        const int st = s.prefix_index - 4;
        ++total[v][st];
        if (s.verdict == AttachmentVerdict::kCorrect) ++correct[v][st];
      }
    }
  }
  CsvTable shift;
  shift.header = {"model", "variant", "stage", "n_items", "n_correct", "percent"};
  for (int v = 0; v < 2; ++v) {
    for (int st = 0; st < 2; ++st) {
      if (total[v][st] == 0) continue;
      shift.rows.push_back({model, v ? "comma_present" : "comma_absent",
                            st ? "chunks_1_5" : "chunks_1_4", std::to_string(total[v][st]),
                            std::to_string(correct[v][st]), Pct(correct[v][st], total[v][st])});
    }
  }
  const fs::path dir = fs::path(config.report_out) / ModelDirName(model);
  StageOutput out;
  Write(out, dir / "trees.csv", ToCsv(trees));
  Write(out, dir / "shift.csv", ToCsv(shift));
  return out;
}

namespace {

CsvTable MeanTrajectoryTable(const std::string& model,
                             const std::vector<TrajectoryPoint>& points) {
  CsvTable t;
  t.header = {"model", "variant", "chunk", "mean_p_yes", "mean_p_no", "mean_p_yes_norm",
              "n", "excluded"};
  for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
    std::vector<TrajectoryPoint> sel;
    for (const auto& p : points) {
      if (p.variant == v) sel.push_back(p);
    }
    if (sel.empty()) continue;
    for (const auto& m : MeanTrajectory(sel)) {
      t.rows.push_back({model, std::string(ToString(v)), std::to_string(m.prefix_index),
                        FormatShortest(m.mean_p_yes), FormatShortest(m.mean_p_no),
                        FormatShortest(m.mean_p_yes_normalized), std::to_string(m.n),
                        std::to_string(m.excluded)});
    }
  }
  return t;
}

}  // namespace

StageOutput TrackInterpretation(const RunConfig& config, int workers) {
  Require(config.bundle_root, "bundle root (--bundles)");
  Require(config.corpus, "corpus (--corpus)");
  const auto corpus = ValidateCorpus(config.corpus);
  const auto groups = GroupBundles(config, corpus, {});
  const std::string model = ModelIdOf(config.bundle_root);

  struct ItemResult {
    std::vector<TrajectoryPoint> mis;
    std::vector<TrajectoryPoint> correct;
  };
  std::vector<ItemResult> results(groups.size());
  ParallelFor(static_cast<int>(groups.size()), workers, [&](int i) {
    std::map<Variant, std::vector<PrefixAnswer>> mis, cor;
    for (const BundleRef& ref : groups[i].refs) {
      auto b = Load(ref, {.load_hidden = false, .load_attention = false}, config.lenient);
      if (!b) continue;
      if (!b->activations.answer) {
        throw ValidationError(ref.dir.string() + ": bundle carries no answer probabilities");
      }
      mis[ref.variant].push_back({ref.prefix_index, *b->activations.answer});
      if (b->activations.answer_correct) {
        cor[ref.variant].push_back({ref.prefix_index, *b->activations.answer_correct});
      }
    }
    for (auto& [v, answers] : mis) {
      auto pts = Trajectory(groups[i].item->id, v, answers);
      results[i].mis.insert(results[i].mis.end(), pts.begin(), pts.end());
    }
    for (auto& [v, answers] : cor) {
      auto pts = Trajectory(groups[i].item->id, v, answers);
      results[i].correct.insert(results[i].correct.end(), pts.begin(), pts.end());
    }
  });

  std::vector<TrajectoryPoint> mis, cor;
  for (auto& r : results) {
    mis.insert(mis.end(), r.mis.begin(), r.mis.end());
    cor.insert(cor.end(), r.correct.begin(), r.correct.end());
  }
  const fs::path dir = fs::path(config.report_out) / ModelDirName(model);
  StageOutput out;
  Write(out, dir / "trajectory.csv", ToCsv(TrajectoryTable(model, mis)));
  Write(out, dir / "trajectory_mean.csv", ToCsv(MeanTrajectoryTable(model, mis)));
  if (!cor.empty()) {
    Write(out, dir / "trajectory_correct.csv", ToCsv(TrajectoryTable(model, cor)));
    Write(out, dir / "trajectory_correct_mean.csv", ToCsv(MeanTrajectoryTable(model, cor)));
  }

  std::vector<GardenPathItem> covered;
  for (const auto& g : groups) covered.push_back(*g.item);
  CsvTable acc;
  acc.header = {"model", "variant", "n_items", "n_rejecting", "accuracy_pct", "ot_n",
                "ot_rejecting", "ot_accuracy_pct", "rat_n", "rat_rejecting",
                "rat_accuracy_pct", "excluded"};
  for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
    std::vector<TrajectoryPoint> finals;
    std::vector<GardenPathItem> items;
    for (const auto& p : mis) {
      if (p.variant == v && p.prefix_index == kNumChunks) finals.push_back(p);
    }
    if (finals.empty()) continue;
    for (const auto& item : covered) {
      for (const auto& p : finals) {
        if (p.item_id == item.id) {
          items.push_back(item);
          break;
        }
      }
    }
    const AccuracySummary s = SummarizeAccuracy(model, v, items, finals);
    acc.rows.push_back({model, std::string(ToString(v)), std::to_string(s.n_items),
                        std::to_string(s.n_rejecting), Pct(s.n_rejecting, s.n_items),
                        std::to_string(s.ot.n_items), std::to_string(s.ot.n_rejecting),
                        Pct(s.ot.n_rejecting, s.ot.n_items), std::to_string(s.rat.n_items),
                        std::to_string(s.rat.n_rejecting), Pct(s.rat.n_rejecting, s.rat.n_items),
                        std::to_string(s.excluded)});
    if (s.excluded > 0) out.notes.push_back(std::to_string(s.excluded) + " degenerate final answers excluded (" + std::string(ToString(v)) + ")");
  }
  Write(out, dir / "accuracy.csv", ToCsv(acc));
  return out;
}

StageOutput Surprisal(const RunConfig& config, int workers) {
  Require(config.bundle_root, "bundle root (--bundles)");
  Require(config.corpus, "corpus (--corpus)");
  const auto corpus = ValidateCorpus(config.corpus);
  const auto groups = GroupBundles(config, corpus, {});
  const std::string model = ModelIdOf(config.bundle_root);

  std::vector<std::vector<ChunkSurprisal>> per_item(groups.size());
  std::atomic<bool> unavailable{false};
  ParallelFor(static_cast<int>(groups.size()), workers, [&](int i) {
    std::map<Variant, std::vector<Bundle>> by_variant;
    for (const BundleRef& ref : groups[i].refs) {
      auto b = Load(ref, {.load_hidden = false, .load_attention = false}, config.lenient);
      if (b) by_variant[ref.variant].push_back(std::move(*b));
    }
    for (auto& [v, bundles] : by_variant) {
      const Bundle* full = nullptr;
      for (const auto& b : bundles) {
        if (b.manifest.prefix_index == kNumChunks) full = &b;
      }
      if (!full) {
        throw ValidationError("surprisal: item '" + groups[i].item->id + "' (" +
                              std::string(ToString(v)) + ") has no full-sentence bundle");
      }
      if (!full->activations.token_logprob) {
        unavailable = true;
        return;
      }
      for (const auto& b : bundles) {
        if (&b != full) CheckPrefixConsistency(*full, b);
      }
      auto s = ChunkSurprisals(*full, *groups[i].item);
      per_item[i].insert(per_item[i].end(), s.chunks.begin(), s.chunks.end());
    }
  });
  StageOutput out;
  if (unavailable) {
    out.notes.push_back("surprisal unavailable for this model (" + model +
                        "): bundles carry no token_logprob");
    log::Warn(out.notes.back());
    return out;
  }
  std::vector<ChunkSurprisal> all;
  for (auto& v : per_item) all.insert(all.end(), v.begin(), v.end());
  CsvTable mean;
  mean.header = {"model", "variant", "chunk", "mean_bits", "n_items"};
  for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
    const SurprisalProfile p = MeanProfile(all, v);
    if (p.n_items == 0) continue;
    for (int c = 0; c < kNumChunks; ++c) {
      mean.rows.push_back({model, std::string(ToString(v)), std::to_string(c + 1),
                           FormatShortest(p.mean_bits[c]), std::to_string(p.n_items)});
    }
  }
  const fs::path dir = fs::path(config.report_out) / ModelDirName(model);
  Write(out, dir / "surprisal.csv", ToCsv(SurprisalTable(model, all)));
  Write(out, dir / "surprisal_mean.csv", ToCsv(mean));
  return out;
}

StageOutput AttentionSensitivity(const RunConfig& config, int workers) {
  Require(config.bundle_root, "bundle root (--bundles)");
  const SpanReduction reduction = ParseSpanReduction(config.attention_reduction);
  BundleFilter filter;
  filter.prefix_index = config.attention_prefix;
  const auto refs = ListBundles(config.bundle_root, filter);
  const std::string model = ModelIdOf(config.bundle_root);

  std::vector<std::optional<HeadMatrix>> per_bundle(refs.size());
  ParallelFor(static_cast<int>(refs.size()), workers, [&](int i) {
    auto b = Load(refs[i], {.load_hidden = false, .load_attention = true}, config.lenient);
    if (b) per_bundle[i] = HeadSensitivity(*b, reduction);
  });
  StageOutput out;
  const fs::path dir = fs::path(config.report_out) / ModelDirName(model);
  std::map<Variant, HeadMatrix> maps;
  for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
    std::vector<HeadMatrix> sel;
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (refs[i].variant == v && per_bundle[i]) sel.push_back(*per_bundle[i]);
    }
    if (sel.empty()) continue;
    maps[v] = AggregateMaps(sel);
    Write(out, dir / ("heatmap_" + std::string(ToString(v)) + ".csv"),
          ToCsv(HeadMatrixTable(maps[v])));
  }
  if (maps.size() == 2) {
    const HeadMatrix diff = ThresholdedDifference(maps[Variant::kCommaPresent],
                                                  maps[Variant::kCommaAbsent],
                                                  config.attention_threshold);
    Write(out, dir / "heatmap_difference.csv", ToCsv(HeadMatrixTable(diff)));
  }
  return out;
}

namespace {

void AddTests(CsvTable& t, const std::string& contrast, const std::vector<double>& x,
              const std::vector<double>& y) {
  const auto add = [&](const stats::StatsResult& r) {
    t.rows.push_back({contrast, r.test_name, FormatShortest(r.t), FormatShortest(r.df),
                      FormatShortest(r.p), std::to_string(r.direction), std::to_string(r.n),
                      FormatShortest(r.mean_difference), r.degenerate ? "true" : "false",
                      r.note});
  };
  try {
    add(stats::PairedT(x, y));
  } catch (const Error& e) {
    log::Warn("stats: ", contrast, " paired: ", e.what());
  }
  try {
    add(stats::WelchT(x, y));
  } catch (const Error& e) {
    log::Warn("stats: ", contrast, " welch: ", e.what());
  }
}

// value[item][variant][prefix]
using Grid = std::map<std::string, std::map<std::string, std::map<int, double>>>;

void Paired(const Grid& g, const std::string& va, int pa, const std::string& vb, int pb,
            std::vector<double>& x, std::vector<double>& y) {
  for (const auto& [item, by_variant] : g) {
    const auto a = by_variant.find(va);
    const auto b = by_variant.find(vb);
    if (a == by_variant.end() || b == by_variant.end()) continue;
    const auto av = a->second.find(pa);
    const auto bv = b->second.find(pb);
    if (av == a->second.end() || bv == b->second.end()) continue;
    if (std::isnan(av->second) || std::isnan(bv->second)) continue;
    x.push_back(av->second);
    y.push_back(bv->second);
  }
}

}  // namespace

StageOutput Stats(const RunConfig& config) {
  const fs::path dir = ModelDir(config);
  CsvTable t;
  t.header = {"contrast", "test", "t", "df", "p", "direction", "n", "mean_difference",
              "degenerate", "note"};
  const std::vector<std::string> variants = {"comma_absent", "comma_present"};

  if (fs::exists(dir / "trajectory.csv")) {
    const auto table = ReadCsv(dir / "trajectory.csv");
    Grid norm, reject;
    for (const auto& p : TrajectoriesFromTable(table, (dir / "trajectory.csv").string())) {
      const std::string v(ToString(p.variant));
      norm[p.item_id][v][p.prefix_index] = p.undefined ? std::nan("") : p.p_yes_normalized;
      if (p.prefix_index == kNumChunks && !p.undefined) {
        reject[p.item_id][v][p.prefix_index] =
            JudgeFinalAnswer(p) == FinalAnswer::kRejectsMisinterpretation ? 1.0 : 0.0;
      }
    }
    std::vector<double> x, y;
    Paired(reject, "comma_present", 5, "comma_absent", 5, x, y);
    AddTests(t, "final_answer_rejection:comma_present-comma_absent", x, y);
    for (const auto& v : variants) {
      for (int later : {4, 5}) {
        x.clear();
        y.clear();
        Paired(norm, v, 3, v, later, x, y);
        AddTests(t, "misinterpretation_drop:" + v + ":chunk3-chunk" + std::to_string(later), x, y);
      }
    }
  }
  if (fs::exists(dir / "trees.csv")) {
    const auto table = ReadCsv(dir / "trees.csv");
    Grid correct;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const int k = ParseInt(table.Cell(r, "prefix"), "trees.csv");
      correct[table.Cell(r, "item")][table.Cell(r, "variant")][k] =
          table.Cell(r, "verdict") == "correct" ? 1.0 : 0.0;
    }
    for (int k : {4, 5}) {
      std::vector<double> x, y;
      Paired(correct, "comma_present", k, "comma_absent", k, x, y);
      AddTests(t, "parse_shift:chunks_1_" + std::to_string(k) + ":comma_present-comma_absent",
               x, y);
    }
    for (const auto& v : variants) {
      std::vector<double> x, y;
      Paired(correct, v, 5, v, 4, x, y);
      AddTests(t, "parse_shift:" + v + ":chunk5-chunk4", x, y);
    }
  }
  if (fs::exists(dir / "surprisal.csv")) {
    const auto rows = SurprisalsFromTable(ReadCsv(dir / "surprisal.csv"),
                                          (dir / "surprisal.csv").string());
    Grid bits;
    for (const auto& c : rows) {
      bits[c.item_id][std::string(ToString(c.variant))][c.chunk_index] = c.mean_surprisal_bits;
    }
    std::vector<double> x, y;
    Paired(bits, "comma_absent", 4, "comma_present", 4, x, y);
    AddTests(t, "surprisal_chunk4:comma_absent-comma_present", x, y);
    // Chunk 4 against the mean of chunks 1-3, per item, comma absent.
    Grid peak;
    for (const auto& [item, by_variant] : bits) {
      const auto it = by_variant.find("comma_absent");
      if (it == by_variant.end() || it->second.size() < 4) continue;
      const auto& c = it->second;
      peak[item]["comma_absent"][4] = c.at(4);
      peak[item]["comma_absent"][0] = (c.at(1) + c.at(2) + c.at(3)) / 3.0;
    }
    x.clear();
    y.clear();
    Paired(peak, "comma_absent", 4, "comma_absent", 0, x, y);
    AddTests(t, "surprisal_peak:comma_absent:chunk4-chunks1_3", x, y);
  }
  StageOutput out;
  if (t.rows.empty()) {
    out.notes.push_back("stats: no contrasts could be computed");
    log::Warn(out.notes.back());
  }
  Write(out, dir / "stats.csv", ToCsv(t));
  return out;
}

StageOutput Report(const RunConfig& config) {
  StageOutput out;
  for (const auto& a : report::GenerateReports(config.report_out)) out.files.push_back(a.path);
  return out;
}

}  // namespace gpprobe::pipeline
