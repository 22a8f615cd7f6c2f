#pragma once

// Test-only file writers plus deterministic synthetic data generators.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gpprobe/bundle.h"
#include "gpprobe/corpus.h"
#include "gpprobe/tree.h"

namespace gpprobe::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Stable 64-bit FNV-1a, used to derive per-object seeds.
std::uint64_t Fnv1a(std::string_view text);

void WriteFloat32(const fs::path& path, std::span<const float> values);
void WriteText(const fs::path& path, const std::string& text);

struct BundleFiles {
  BundleManifest manifest;
  std::vector<float> hidden;     // [L+1, T, D]
  std::vector<float> attention;  // [L, H, T, T]
  std::optional<std::vector<float>> token_logprob;
  std::optional<AnswerProbs> answer;
  std::optional<AnswerProbs> answer_correct;
};

std::string ManifestJson(const BundleManifest& m);
void WriteBundle(const fs::path& dir, const BundleFiles& files);
fs::path BundleDir(const fs::path& root, const std::string& item, Variant v, int prefix);

// Word-level tokenization used by the synthetic exporter: one token per
// whitespace word, with a trailing comma split into its own token owned by
// the same word.
struct Tokenized {
  std::vector<std::string> tokens;
  std::vector<int> word_of_token;
};
Tokenized Tokenize(const std::vector<std::string>& words);

struct SyntheticModel {
  std::string model_id = "synthetic/causal-tiny";
  int n_layers = 2;
  int n_heads = 3;
  int hidden_dim = 8;
  bool causal = true;
  bool with_logprob = true;
  bool with_correct_answer = true;
  std::uint64_t seed = 1;
};

// Deterministic bundle for one (item, variant, prefix). Word vectors and
// token log-probs depend only on the word/token position, so prefixes agree
// with the full sentence.
BundleFiles MakeSyntheticBundle(const GardenPathItem& item, Variant variant, int prefix,
                                const SyntheticModel& model);
void WriteSyntheticBundles(const fs::path& root, const std::vector<GardenPathItem>& corpus,
                           const SyntheticModel& model);

// Uniform random labelled tree on n nodes via a random Pruefer sequence.
std::vector<Edge> RandomTree(int n, std::mt19937_64& rng);

// Decodes a Pruefer sequence over n >= 2 nodes.
std::vector<Edge> PrueferTree(int n, const std::vector<int>& sequence);
// Every labelled spanning tree on n nodes (n^(n-2) of them).
std::vector<std::vector<Edge>> AllLabeledTrees(int n);
// Exhaustive minimum spanning-tree weight over AllLabeledTrees.
double BruteForceMstWeight(const std::vector<double>& distances, int n);

// Treebank of random trees with hidden states embedding each tree: a word's
// vector at the probe layer is the sum of per-edge directions on its path to
// the root, so squared distances approximate path lengths. Writes
// <dir>/treebank.conllu and <dir>/activations/<sent_id>/.
struct PlantedTreebankPaths {
  fs::path treebank;
  fs::path activations;
};
PlantedTreebankPaths WritePlantedTreebank(const fs::path& dir, int n_sentences, int min_words,
                                          int max_words, const SyntheticModel& model,
                                          std::uint64_t seed);

// Stage CSVs for two models whose shift rows are the published table values.
void WriteReportFixture(const fs::path& root);

std::vector<GardenPathItem> SampleCorpus();
fs::path SourceDir();

}  // namespace gpprobe::testing
