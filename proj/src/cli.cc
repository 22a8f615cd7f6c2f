#include "gpprobe/cli.h"

#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpprobe/config.h"
#include "gpprobe/error.h"
#include "gpprobe/kernels.h"
#include "gpprobe/log.h"
#include "gpprobe/pipeline.h"
#include "gpprobe/probe.h"
#include "gpprobe/table.h"

namespace gpprobe {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  bool lenient = false;
  std::string log_level = "info";
  std::string simd = "auto";
  std::optional<std::string> probe, bundles, corpus, out, treebank, activations;
  std::optional<std::string> layer;
  std::optional<int> rank, epochs, prefix;
  std::optional<double> lr, threshold;
  std::optional<std::string> reduction;
  std::string corpus_positional;
};

log::Level ParseLevel(const std::string& s) {
  if (s == "debug") return log::Level::kDebug;
  if (s == "info") return log::Level::kInfo;
  if (s == "warn") return log::Level::kWarn;
  if (s == "error") return log::Level::kError;
  if (s == "quiet") return log::Level::kQuiet;
  throw ValidationError("unknown log level '" + s + "'");
}

RunConfig Resolve(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : LoadRunConfig(f.config);
  if (f.seed) c.probe_seed = *f.seed;
  if (f.workers > 0) c.workers = f.workers;
  if (f.lenient) c.lenient = true;
  if (f.probe) c.probe_path = *f.probe;
  if (f.bundles) c.bundle_root = *f.bundles;
  if (f.corpus) c.corpus = *f.corpus;
  if (!f.corpus_positional.empty()) c.corpus = f.corpus_positional;
  if (f.out) c.report_out = *f.out;
  if (f.treebank) c.treebank = *f.treebank;
  if (f.activations) c.activations = *f.activations;
  if (f.layer) c.Apply({{"probe.layer", *f.layer}}, "--layer");
  if (f.rank) c.probe_rank = *f.rank;
  if (f.epochs) c.probe_epochs = *f.epochs;
  if (f.lr) c.probe_lr = *f.lr;
  if (f.prefix) c.Apply({{"attention.prefix", std::to_string(*f.prefix)}}, "--prefix");
  if (f.threshold) c.attention_threshold = *f.threshold;
  if (f.reduction) c.attention_reduction = *f.reduction;
  return c;
}

std::string Relative(const fs::path& p, const fs::path& root) {
  std::error_code ec;
  const fs::path rel = fs::relative(p, root, ec);
  return (ec || rel.empty() ? p : rel).generic_string();
}

class Runner {
 public:
  Runner(RunConfig config, std::ostream& out) : config_(std::move(config)), out_(out) {
    workers_ = ResolveWorkers(config_.workers);
  }

  void ValidateCorpus() {
    if (config_.corpus.empty()) throw ValidationError("missing required setting: corpus");
    const auto items = pipeline::ValidateCorpus(config_.corpus);
    int ot = 0;
    for (const auto& i : items) ot += i.verb_class == VerbClass::kOT;
    out_ << config_.corpus << ": " << items.size() << " items (" << ot << " OT, "
         << items.size() - ot << " RAT)\n";
    Note("corpus: " + std::to_string(items.size()) + " items");
  }

  void TrainProbe() {
    std::vector<double> dev;
    const TrainResult r = pipeline::TrainProbeFromFiles(config_, workers_, &dev);
    if (config_.probe_path.empty()) {
      config_.probe_path = (fs::path(config_.report_out) / "probe.bin").string();
    }
    WriteProbe(r.probe, config_.probe_path);
    files_.push_back(config_.probe_path);

    CsvTable losses;
    losses.header = {"epoch", "loss"};
    for (std::size_t e = 0; e < r.epoch_losses.size(); ++e) {
      losses.rows.push_back({std::to_string(e + 1), FormatShortest(r.epoch_losses[e])});
    }
    const fs::path loss_path = fs::path(config_.report_out) / "probe_training.csv";
    WriteTextFile(loss_path, ToCsv(losses));
    files_.push_back(loss_path);
    if (!dev.empty()) {
      CsvTable sweep;
      sweep.header = {"layer", "dev_uuas"};
      for (std::size_t l = 0; l < dev.size(); ++l) {
        sweep.rows.push_back({std::to_string(l), FormatShortest(dev[l])});
      }
      const fs::path sweep_path = fs::path(config_.report_out) / "probe_layer_sweep.csv";
      WriteTextFile(sweep_path, ToCsv(sweep));
      files_.push_back(sweep_path);
    }
    out_ << "probe: layer " << r.probe.layer() << ", rank " << r.probe.rank() << ", final loss "
         << FormatFixed(r.epoch_losses.empty() ? 0.0 : r.epoch_losses.back(), 6) << " -> "
         << config_.probe_path << "\n";
  }

  void Stage(const pipeline::StageOutput& s) {
    files_.insert(files_.end(), s.files.begin(), s.files.end());
    notes_.insert(notes_.end(), s.notes.begin(), s.notes.end());
    for (const auto& f : s.files) out_ << "wrote " << f.generic_string() << "\n";
  }

  void Run(const std::string& command) {
    if (command == "validate-corpus") ValidateCorpus();
    else if (command == "train-probe") TrainProbe();
    else if (command == "extract-trees") Stage(pipeline::ExtractTrees(config_, workers_));
    else if (command == "track-interpretation") Stage(pipeline::TrackInterpretation(config_, workers_));
    else if (command == "surprisal") Stage(pipeline::Surprisal(config_, workers_));
    else if (command == "attention-sensitivity") Stage(pipeline::AttentionSensitivity(config_, workers_));
    else if (command == "stats") Stage(pipeline::Stats(config_));
    else if (command == "report") Stage(pipeline::Report(config_));
    else if (command == "all") All();
  }

  void WriteSummary(const std::string& command) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = config_.probe_seed;
    j["settings"] = {
        {"probe.rank", config_.probe_rank},
        {"probe.layer", config_.probe_layer ? nlohmann::ordered_json(*config_.probe_layer)
                                            : nlohmann::ordered_json("auto")},
        {"probe.lr", config_.probe_lr},
        {"probe.epochs", config_.probe_epochs},
        {"attention.prefix", config_.attention_prefix},
        {"attention.threshold", config_.attention_threshold},
        {"attention.reduction", config_.attention_reduction},
    };
    const fs::path root = config_.report_out;
    std::vector<std::string> files;
    for (const auto& f : files_) files.push_back(Relative(f, root));
    j["files"] = files;
    j["notes"] = notes_;
    WriteTextFile(root / "run_summary.json", j.dump(2) + "\n");
  }

 private:
  void Note(std::string s) { notes_.push_back(std::move(s)); }

  void All() {
    if (config_.bundle_root.empty()) {
      throw ValidationError("missing required setting: bundle root (--bundles)");
    }
    ValidateCorpus();
    if (!config_.treebank.empty() && !config_.activations.empty()) {
      TrainProbe();
    } else {
      Note("train-probe skipped: no treebank/activations configured");
    }
    if (!config_.probe_path.empty()) {
      Stage(pipeline::ExtractTrees(config_, workers_));
    } else {
      Note("extract-trees skipped: no probe available");
    }
    Stage(pipeline::TrackInterpretation(config_, workers_));
    Stage(pipeline::Surprisal(config_, workers_));
    Stage(pipeline::AttentionSensitivity(config_, workers_));
    Stage(pipeline::Stats(config_));
    Stage(pipeline::Report(config_));
  }

  RunConfig config_;
  std::ostream& out_;
  int workers_ = 1;
  std::vector<fs::path> files_;
  std::vector<std::string> notes_;
};

void AddCommon(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "Run configuration file (key = value)");
  app->add_option("--seed", f.seed, "Seed for all randomness");
  app->add_option("--workers", f.workers, "Worker threads for per-item stages")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("--lenient", f.lenient, "Skip invalid bundles with a warning");
  app->add_option("--log-level", f.log_level, "debug, info, warn, error or quiet");
  app->add_option("--simd", f.simd, "Kernel variant: auto, scalar or avx2");
  app->add_option("--bundles", f.bundles, "Activation bundle root");
  app->add_option("--corpus", f.corpus, "Corpus JSONL file");
  app->add_option("--out", f.out, "Report output directory");
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Garden-path probing engine", "gpprobe"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  Flags f;

  const auto sub = [&](const std::string& name, const std::string& desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    AddCommon(s, f);
    return s;
  };
  const auto probe_training = [&](CLI::App* s) {
    s->add_option("--treebank", f.treebank, "CoNLL-U training treebank");
    s->add_option("--activations", f.activations, "Per-sentence hidden-state directories");
    s->add_option("--layer", f.layer, "Probe layer index or 'auto'");
    s->add_option("--rank", f.rank, "Probe rank");
    s->add_option("--lr", f.lr, "Learning rate");
    s->add_option("--epochs", f.epochs, "Training epochs");
  };
  const auto attention = [&](CLI::App* s) {
    s->add_option("--prefix", f.prefix, "Prefix index to analyse (4 or 5)");
    s->add_option("--threshold", f.threshold, "Difference-map threshold");
    s->add_option("--reduction", f.reduction, "Span reduction: max or mean");
  };

  CLI::App* validate = sub("validate-corpus", "Check a corpus file");
  validate->add_option("corpus_file", f.corpus_positional, "Corpus JSONL file");
  CLI::App* train = sub("train-probe", "Train a structural probe");
  probe_training(train);
  train->add_option("--probe", f.probe, "Output probe file");
  CLI::App* extract = sub("extract-trees", "Decode parse trees from bundles");
  extract->add_option("--probe", f.probe, "Trained probe file");
  sub("track-interpretation", "Misinterpretation probability per prefix");
  sub("surprisal", "Per-chunk surprisal");
  attention(sub("attention-sensitivity", "Head sensitivity maps"));
  sub("stats", "Significance tests over stage outputs");
  sub("report", "Render tables and figures");
  CLI::App* all = sub("all", "Run every stage in order");
  probe_training(all);
  attention(all);
  all->add_option("--probe", f.probe, "Probe file (written when training)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitValidation;
  }
  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();

  try {
    log::SetLevel(ParseLevel(f.log_level));
    if (!kernels::SelectVariant(f.simd)) {
      throw ValidationError("kernel variant '" + f.simd + "' is not available on this machine");
    }
    RunConfig config = Resolve(f);
    if (command == "extract-trees" && config.probe_path.empty()) {
      err << "error: extract-trees requires --probe\n\n" << chosen->help();
      return kExitValidation;
    }
    Runner runner(std::move(config), out);
    runner.Run(command);
    if (command != "validate-corpus") runner.WriteSummary(command);
    return kExitOk;
  } catch (const Error& e) {
    log::Err(e.what());
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::kIo ? kExitIo : kExitValidation;
  } catch (const std::exception& e) {
    log::Err(e.what());
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace gpprobe
