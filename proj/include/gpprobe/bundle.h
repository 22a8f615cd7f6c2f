#pragma once

// Reader and validator for activation bundles: one directory per
// (item, variant, prefix) holding a JSON manifest and raw little-endian
// float32 tensors.
//
//   <root>/<item_id>/<variant>/prefix_<k>/manifest.json
//                                          hidden.f32          [L+1, T, D]
//                                          attn.f32            [L, H, T, T]
//                                          token_logprob.f32   [T]  (causal)
//                                          answer.json         {"p_yes", "p_no",
//                                                               "correct": {...}?}

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gpprobe/corpus.h"
#include "gpprobe/tensor.h"

namespace gpprobe {

inline constexpr double kAttentionRowTolerance = 1e-3;
inline constexpr double kAnswerMassTolerance = 1e-6;

// Half-open token range; empty when the role's word is not in the prefix.
struct TokenSpan {
  int begin = 0;
  int end = 0;

  bool empty() const { return end <= begin; }
  int size() const { return empty() ? 0 : end - begin; }
  bool operator==(const TokenSpan&) const = default;
};

struct RoleTokenSpans {
  TokenSpan verb1;
  TokenSpan np_head;
  TokenSpan verb2;
};

struct PayloadFlags {
  bool hidden = true;
  bool attention = true;
  bool token_logprob = true;
  bool answer = true;
};

struct BundleManifest {
  std::string model_id;
  std::string item_id;
  Variant variant = Variant::kCommaAbsent;
  int prefix_index = 1;
  int n_layers = 0;
  int n_heads = 0;
  int hidden_dim = 0;
  bool causal = false;
  std::vector<std::string> tokens;
  std::vector<int> word_of_token;
  RoleWords role_words;
  RoleTokenSpans role_token_spans;
  PayloadFlags payload;

  int num_tokens() const { return static_cast<int>(tokens.size()); }
  int num_words() const {
    return word_of_token.empty() ? 0 : word_of_token.back() + 1;
  }
};

struct AnswerProbs {
  double p_yes = 0.0;
  double p_no = 0.0;
};

struct PrefixActivations {
  FloatTensor hidden;                  // [n_layers + 1, T, hidden_dim]
  FloatTensor attention;               // [n_layers, n_heads, T, T]
  std::optional<std::vector<float>> token_logprob;  // [T], natural log
  std::optional<AnswerProbs> answer;
  // Probabilities for the correct-interpretation question, when exported
  // under answer.json's optional "correct" object.
  std::optional<AnswerProbs> answer_correct;
};

struct Bundle {
  std::filesystem::path dir;
  BundleManifest manifest;
  PrefixActivations activations;
};

struct ReadOptions {
  // Tensors that are not loaded are still size-checked against the manifest.
  bool load_hidden = true;
  bool load_attention = true;
};

BundleManifest ParseManifest(const std::string& json_text,
                             const std::string& where);

// Throws ValidationError for any invariant violation and IoError for a
// missing or unreadable file.
Bundle ReadBundle(const std::filesystem::path& dir, const ReadOptions& options = {});

// Checks invariants that only need the already-parsed manifest.
void ValidateManifest(const BundleManifest& m, const std::string& where);

void ValidateAttention(const FloatTensor& attention, bool causal,
                       const std::string& where);
void ValidateAnswer(const AnswerProbs& answer, const std::string& where);

// Reads a little-endian float32 file and checks its byte length.
std::vector<float> ReadFloat32File(const std::filesystem::path& path,
                                   std::size_t expected_elements);

struct BundleFilter {
  std::optional<std::set<std::string>> items;
  std::optional<Variant> variant;
  std::optional<int> prefix_index;

  bool Matches(const std::string& item, Variant v, int prefix) const;
};

struct BundleRef {
  std::string item_id;
  Variant variant = Variant::kCommaAbsent;
  int prefix_index = 0;
  std::filesystem::path dir;
};

// Bundle directories under `root` matching `filter`, sorted by
// (item_id, variant, prefix_index). Throws "no bundles matched" on an
// empty selection.
std::vector<BundleRef> ListBundles(const std::filesystem::path& root,
                                   const BundleFilter& filter = {});

// ReadBundle plus a check that the manifest's (item, variant, prefix)
// matches the directory it was found in.
Bundle ReadBundle(const BundleRef& ref, const ReadOptions& options = {});

struct IterateOptions {
  ReadOptions read;
  // Skip bundles failing validation with a warning instead of aborting.
  bool lenient = false;
};

// Reads each selected bundle in order and hands it to `visit`. Returns the
// number of bundles visited.
int IterateBundles(const std::filesystem::path& root, const BundleFilter& filter,
                   const IterateOptions& options,
                   const std::function<void(const Bundle&)>& visit);

std::string PrefixDirName(int prefix_index);

// Hidden states for one treebank sentence, used to train the probe:
// <dir>/manifest.json (model_id, n_layers, hidden_dim, tokens,
// word_of_token, shapes.hidden) and <dir>/hidden.f32.
struct HiddenStates {
  std::string model_id;
  int n_layers = 0;
  int hidden_dim = 0;
  std::vector<std::string> tokens;
  std::vector<int> word_of_token;
  FloatTensor hidden;  // [n_layers + 1, T, hidden_dim]

  int num_words() const {
    return word_of_token.empty() ? 0 : word_of_token.back() + 1;
  }
};

HiddenStates ReadHiddenStates(const std::filesystem::path& dir);

}  // namespace gpprobe
