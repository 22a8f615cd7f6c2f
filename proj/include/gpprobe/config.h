#pragma once

// Run configuration: a flat TOML-style file of `key = value` lines with
// optional [section] headers. Every key mirrors a CLI flag; flags win.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace gpprobe {

// Parsed as dotted keys ("probe.rank"). Values keep their text with quotes
// stripped.
std::map<std::string, std::string> ParseConfigText(std::string_view text,
                                                   const std::string& source_name);

struct RunConfig {
  std::string bundle_root;
  std::string corpus;
  std::string treebank;
  std::string activations;
  std::string probe_path;

  int probe_rank = 64;
  std::optional<int> probe_layer;  // nullopt = sweep layers on dev UUAS
  double probe_lr = 0.01;
  int probe_epochs = 30;
  std::uint64_t probe_seed = 0;
  int probe_batch_size = 1;
  double probe_dev_fraction = 0.2;

  int attention_prefix = 5;
  double attention_threshold = 0.05;
  std::string attention_reduction = "max";

  std::string report_out = "reports";
  int workers = 0;  // 0 = GPPROBE_WORKERS or available parallelism
  bool lenient = false;

  // Applies known keys; throws ValidationError on unknown keys or bad values.
  void Apply(const std::map<std::string, std::string>& values, const std::string& source);
};

RunConfig LoadRunConfig(const std::filesystem::path& path);

// Worker count from the flag, then GPPROBE_WORKERS, then the hardware.
int ResolveWorkers(int flag_value);

}  // namespace gpprobe
