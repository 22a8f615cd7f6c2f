#pragma once

// Structural probe: a rank-k linear map B such that squared distances
// ||B (h_i - h_j)||^2 between word vectors approximate parse-tree path
// lengths. Trees are read back as minimum spanning trees over those
// distances.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gpprobe/bundle.h"
#include "gpprobe/corpus.h"
#include "gpprobe/tree.h"

namespace gpprobe {

// Row-major [n, dim] matrix of word vectors.
struct WordMatrix {
  int n = 0;
  int dim = 0;
  std::vector<double> data;

  WordMatrix() = default;
  WordMatrix(int rows, int cols)
      : n(rows), dim(cols), data(static_cast<std::size_t>(rows) * cols, 0.0) {}

  std::span<const double> row(int i) const {
    return std::span<const double>(data).subspan(static_cast<std::size_t>(i) * dim, dim);
  }
  std::span<double> row(int i) {
    return std::span<double>(data).subspan(static_cast<std::size_t>(i) * dim, dim);
  }
};

struct TrainingConfig {
  int rank = 64;
  int layer = 0;
  double learning_rate = 0.01;
  int epochs = 30;
  int batch_size = 1;
  std::uint64_t seed = 0;
  // Learning rate is multiplied by this when an epoch fails to improve.
  double lr_decay = 0.5;
};

class StructuralProbe {
 public:
  StructuralProbe() = default;
  // Throws ValidationError unless 1 <= rank <= hidden_dim and B is finite.
  StructuralProbe(int rank, int hidden_dim, int layer, std::vector<double> matrix,
                  TrainingConfig config = {});

  // Gaussian init with standard deviation 1/sqrt(hidden_dim).
  static StructuralProbe RandomInit(int rank, int hidden_dim, int layer,
                                    const TrainingConfig& config);

  int rank() const { return rank_; }
  int hidden_dim() const { return hidden_dim_; }
  int layer() const { return layer_; }
  const TrainingConfig& config() const { return config_; }
  std::span<const double> matrix() const { return matrix_; }
  std::span<double> mutable_matrix() { return matrix_; }

  // ||B (a - b)||^2. Throws on dimension mismatch.
  double Distance(std::span<const double> a, std::span<const double> b) const;

  // B h for each row of `words`, as a [n, rank] matrix.
  WordMatrix Project(const WordMatrix& words) const;

  // Row-major [n, n] probe distances between all word pairs.
  std::vector<double> DistanceMatrix(const WordMatrix& words) const;

 private:
  int rank_ = 0;
  int hidden_dim_ = 0;
  int layer_ = 0;
  std::vector<double> matrix_;  // [rank, hidden_dim]
  TrainingConfig config_;
};

// One supervised sentence: word vectors plus target pairwise distances
// (row-major [n, n]; tree path lengths for real data).
struct TrainingSentence {
  WordMatrix words;
  std::vector<double> target;
};

TrainingSentence MakeTrainingSentence(WordMatrix words, const GoldTree& gold);

// Per-sentence loss (1/n^2) sum_{i,j} |d_B(i,j) - target(i,j)|. When
// `gradient` is non-empty it receives dL/dB ([rank, hidden_dim]); the
// sign of a zero residual is taken as 0.
double SentenceLoss(const StructuralProbe& probe, const TrainingSentence& s,
                    std::span<double> gradient = {});

struct TrainResult {
  StructuralProbe probe;
  std::vector<double> epoch_losses;
};

// Plain minibatch SGD from a seeded Gaussian init. Throws on malformed
// input, such as sentences shorter than two words, or on a non-finite loss.
TrainResult TrainProbe(const std::vector<TrainingSentence>& sentences,
                       int hidden_dim, const TrainingConfig& config);

struct LayerSweep {
  int best_layer = 0;
  std::vector<double> dev_uuas;  // indexed by layer
  TrainResult best;
};

// Trains one probe per layer on the first (1 - dev_fraction) of the
// sentences and keeps the layer with the highest mean dev UUAS. Ties go to
// the lower layer.
LayerSweep SweepLayers(int n_layers_with_embeddings, int hidden_dim,
                       const std::function<std::vector<TrainingSentence>(int)>& data,
                       const std::vector<GoldTree>& gold, double dev_fraction,
                       const TrainingConfig& config);

// Fraction of gold edges recovered, compared as unordered pairs.
double Uuas(const std::vector<Edge>& predicted, const GoldTree& gold);
double Uuas(const std::vector<Edge>& predicted, const std::vector<Edge>& gold, int n);

// Mean-pools subword hidden states at `layer` into one vector per word.
WordMatrix PoolWords(const FloatTensor& hidden, int layer,
                     std::span<const int> word_of_token);

enum class AttachmentVerdict { kMisinterpretation, kCorrect, kOther };

std::string_view ToString(AttachmentVerdict v);

// Compares tree-path lengths from the noun-phrase head to each verb. Nearer
// the second verb is `correct`, nearer the first is `misinterpretation`.
// Ties, or a noun or first verb outside 0..n-1, are `other`; a second verb
// not yet in the prefix counts as infinitely far.
AttachmentVerdict JudgeAttachment(const std::vector<Edge>& tree, int n,
                                  const RoleWords& roles);

struct ParseTreeSnapshot {
  std::string item_id;
  Variant variant = Variant::kCommaAbsent;
  int prefix_index = 0;
  std::vector<std::string> words;
  std::vector<Edge> edges;
  std::vector<double> distances;
  AttachmentVerdict verdict = AttachmentVerdict::kOther;
};

ParseTreeSnapshot ExtractSnapshot(const StructuralProbe& probe, const Bundle& bundle,
                                  const GardenPathItem& item);

void WriteProbe(const StructuralProbe& probe, const std::filesystem::path& path);
StructuralProbe ReadProbe(const std::filesystem::path& path);

}  // namespace gpprobe
