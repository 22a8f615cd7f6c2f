#pragma once

// The analysis stages behind the CLI subcommands. Each stage writes CSVs
// under <report.out>/<model>/ and returns the paths it wrote. Per-item work runs on `workers` threads; results are always
// reduced in item order.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gpprobe/config.h"
#include "gpprobe/corpus.h"
#include "gpprobe/probe.h"

namespace gpprobe::pipeline {

// Runs fn(0..n-1) on up to `workers` threads. The first exception thrown
// by any task is rethrown after all threads join.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

// Filesystem-safe directory name for a model id ("org/name" -> "org_name").
std::string ModelDirName(const std::string& model_id);

// model_id shared by all bundles under the root; throws if they disagree.
std::string ModelIdOf(const std::filesystem::path& bundle_root);

std::filesystem::path ModelDir(const RunConfig& config);

struct StageOutput {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;
};

std::vector<GardenPathItem> ValidateCorpus(const std::filesystem::path& path);

TrainResult TrainProbeFromFiles(const RunConfig& config, int workers,
                                std::vector<double>* dev_uuas = nullptr);

StageOutput ExtractTrees(const RunConfig& config, int workers);
StageOutput TrackInterpretation(const RunConfig& config, int workers);
// Returns no files (and a note) when bundles carry no token log-probs.
StageOutput Surprisal(const RunConfig& config, int workers);
StageOutput AttentionSensitivity(const RunConfig& config, int workers);
StageOutput Stats(const RunConfig& config);
StageOutput Report(const RunConfig& config);

}  // namespace gpprobe::pipeline
