#include "gpprobe/surprisal.h"

#include <cmath>
#include <numbers>

#include "gpprobe/error.h"

namespace gpprobe {

double SurprisalBits(double natural_logprob) {
  const double bits = -natural_logprob / std::numbers::ln2;
  return bits == 0.0 ? 0.0 : bits;
}

SentenceSurprisal ChunkSurprisals(const Bundle& b, const GardenPathItem& item) {
  const BundleManifest& m = b.manifest;
  if (!b.activations.token_logprob) {
    throw ValidationError("surprisal unavailable for this model (" + m.model_id +
                          "): bundle has no token_logprob");
  }
  const int n_words = static_cast<int>(item.Words().size());
  if (m.num_words() != n_words) {
    throw ValidationError(b.dir.string() +
                          ": surprisal needs the full-sentence bundle (prefix 5)");
  }
  const auto& lp = *b.activations.token_logprob;
  SentenceSurprisal out;
  std::vector<double> sum(kNumChunks, 0.0);
  std::vector<int> count(kNumChunks, 0);
  for (std::size_t t = 0; t < lp.size(); ++t) {
    if (t == 0) {
      ++out.excluded_tokens;
      continue;
    }
    const int chunk = item.ChunkOfWord(m.word_of_token[t]);
    if (chunk < 0) {
      throw ValidationError(b.dir.string() + ": token " + std::to_string(t) +
                            " is not mapped to a chunk");
    }
    sum[chunk] += SurprisalBits(lp[t]);
    ++count[chunk];
  }
  for (int c = 0; c < kNumChunks; ++c) {
    if (count[c] == 0) {
      throw ValidationError(b.dir.string() + ": chunk " + std::to_string(c + 1) +
                            " has no scored tokens");
    }
    out.chunks.push_back({item.id, m.variant, c + 1, sum[c] / count[c], count[c]});
  }
  return out;
}

void CheckPrefixConsistency(const Bundle& full, const Bundle& prefix, double tolerance) {
  if (!full.activations.token_logprob || !prefix.activations.token_logprob) return;
  const auto& a = *full.activations.token_logprob;
  const auto& b = *prefix.activations.token_logprob;
  if (b.size() > a.size()) {
    throw ValidationError(prefix.dir.string() + ": prefix has more tokens than the sentence");
  }
  for (std::size_t t = 0; t < b.size(); ++t) {
    if (prefix.manifest.tokens[t] != full.manifest.tokens[t]) {
      throw ValidationError(prefix.dir.string() + ": prefix token " + std::to_string(t) +
                            " differs from the full sentence");
    }
    if (std::abs(double(a[t]) - double(b[t])) > tolerance) {
      throw ValidationError(prefix.dir.string() + ": token_logprob at token " +
                            std::to_string(t) +
                            " differs from the full-sentence pass (not causal?)");
    }
  }
}

SurprisalProfile MeanProfile(std::span<const ChunkSurprisal> chunks, Variant variant) {
  SurprisalProfile p;
  p.variant = variant;
  p.mean_bits.assign(kNumChunks, 0.0);
  std::vector<int> n(kNumChunks, 0);
  for (const auto& c : chunks) {
    if (c.variant != variant) continue;
    p.mean_bits[c.chunk_index - 1] += c.mean_surprisal_bits;
    ++n[c.chunk_index - 1];
  }
  for (int k = 0; k < kNumChunks; ++k) {
    p.mean_bits[k] = n[k] > 0 ? p.mean_bits[k] / n[k] : std::nan("");
  }
  p.n_items = n[0];
  return p;
}

double DisambiguationPeak(const SurprisalProfile& p) {
  const double before = (p.mean_bits[0] + p.mean_bits[1] + p.mean_bits[2]) / 3.0;
  return p.mean_bits[3] - before;
}

CsvTable SurprisalTable(const std::string& model_id, std::span<const ChunkSurprisal> chunks) {
  CsvTable t;
  t.header = {"model", "item", "variant", "chunk", "mean_bits", "n_tokens"};
  for (const auto& c : chunks) {
    t.rows.push_back({model_id, c.item_id, std::string(ToString(c.variant)),
                      std::to_string(c.chunk_index), FormatShortest(c.mean_surprisal_bits),
                      std::to_string(c.token_count)});
  }
  return t;
}

std::vector<ChunkSurprisal> SurprisalsFromTable(const CsvTable& table,
                                                const std::string& where) {
  std::vector<ChunkSurprisal> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string w = where + " row " + std::to_string(r + 2);
    ChunkSurprisal c;
    c.item_id = table.Cell(r, "item");
    c.variant = ParseVariant(table.Cell(r, "variant"));
    c.chunk_index = ParseInt(table.Cell(r, "chunk"), w);
    if (c.chunk_index < 1 || c.chunk_index > kNumChunks) {
      throw ValidationError(w + ": chunk out of range");
    }
    c.mean_surprisal_bits = ParseDouble(table.Cell(r, "mean_bits"), w);
    c.token_count = ParseInt(table.Cell(r, "n_tokens"), w);
    out.push_back(c);
  }
  return out;
}

}  // namespace gpprobe
