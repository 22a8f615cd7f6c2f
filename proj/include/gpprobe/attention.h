#pragma once

// Attention-head sensitivity: how much more a head links the noun phrase to
// the disambiguating verb than to the first verb.

#include <span>
#include <string>
#include <vector>

#include "gpprobe/bundle.h"
#include "gpprobe/table.h"

namespace gpprobe {

inline constexpr double kDefaultDifferenceThreshold = 0.05;

enum class SpanReduction { kMax, kMean };

SpanReduction ParseSpanReduction(std::string_view s);

// [n_layers, n_heads] row-major values.
struct HeadMatrix {
  int n_layers = 0;
  int n_heads = 0;
  std::vector<double> values;

  HeadMatrix() = default;
  HeadMatrix(int layers, int heads)
      : n_layers(layers), n_heads(heads),
        values(static_cast<std::size_t>(layers) * heads, 0.0) {}

  double at(int layer, int head) const { return values[layer * n_heads + head]; }
  double& at(int layer, int head) { return values[layer * n_heads + head]; }
  bool operator==(const HeadMatrix&) const = default;
};

// Attention from the later span to the earlier span: every query token in
// `later` attending to every key token in `earlier`, reduced to one weight.
double Evidence(const FloatTensor& attention, int layer, int head, TokenSpan later,
                TokenSpan earlier, SpanReduction reduction);

// Per-head evidence(verb2 -> np) - evidence(np -> verb1). Throws
// "missing role span" when any span is empty.
HeadMatrix HeadSensitivity(const FloatTensor& attention, const RoleTokenSpans& spans,
                           SpanReduction reduction = SpanReduction::kMax);

// Bundle form; additionally asserts on causal bundles that the unused
// earlier->later direction carries no mass.
HeadMatrix HeadSensitivity(const Bundle& bundle,
                           SpanReduction reduction = SpanReduction::kMax);

struct SensitivityMap {
  std::string model_id;
  Variant variant = Variant::kCommaAbsent;
  int n_items = 0;
  HeadMatrix matrix;
};

// Element-wise mean. Throws on an empty input or mismatched shapes.
HeadMatrix AggregateMaps(std::span<const HeadMatrix> per_item);

// present - absent with cells whose magnitude is below `threshold` zeroed.
HeadMatrix ThresholdedDifference(const HeadMatrix& present, const HeadMatrix& absent,
                                 double threshold = kDefaultDifferenceThreshold);

// Columns: layer, head, value.
CsvTable HeadMatrixTable(const HeadMatrix& m);
HeadMatrix HeadMatrixFromTable(const CsvTable& table, const std::string& where);

}  // namespace gpprobe
