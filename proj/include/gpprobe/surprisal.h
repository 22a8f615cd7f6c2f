#pragma once

#include <span>
#include <string>
#include <vector>

#include "gpprobe/bundle.h"
#include "gpprobe/corpus.h"
#include "gpprobe/table.h"

namespace gpprobe {

struct ChunkSurprisal {
  std::string item_id;
  Variant variant = Variant::kCommaAbsent;
  int chunk_index = 0;  // 1..5
  double mean_surprisal_bits = 0.0;
  int token_count = 0;
};

struct SentenceSurprisal {
  std::vector<ChunkSurprisal> chunks;  // 5 entries
  int excluded_tokens = 0;             // tokens without left context
};

// -log2 p for a natural-log probability.
double SurprisalBits(double natural_logprob);

// Per-chunk mean surprisal from the full-sentence bundle. The first token
// has no left context and is excluded. A comma token belongs to the word
// it is attached to, i.e. chunk 1.
SentenceSurprisal ChunkSurprisals(const Bundle& full_sentence, const GardenPathItem& item);

// Causal scoring makes a prefix's token log-probabilities a prefix of the
// full sentence's. Throws when they disagree beyond `tolerance` nats.
void CheckPrefixConsistency(const Bundle& full_sentence, const Bundle& prefix,
                            double tolerance = 1e-3);

struct SurprisalProfile {
  Variant variant = Variant::kCommaAbsent;
  std::vector<double> mean_bits;  // per chunk, equal weight per item
  int n_items = 0;
};

SurprisalProfile MeanProfile(std::span<const ChunkSurprisal> chunks, Variant variant);

// Mean of chunk 4 minus mean of chunks 1-3.
double DisambiguationPeak(const SurprisalProfile& profile);

// Columns: model, item, variant, chunk, mean_bits, n_tokens.
CsvTable SurprisalTable(const std::string& model_id, std::span<const ChunkSurprisal> chunks);
std::vector<ChunkSurprisal> SurprisalsFromTable(const CsvTable& table,
                                                const std::string& where);

}  // namespace gpprobe
