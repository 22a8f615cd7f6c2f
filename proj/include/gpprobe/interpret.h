#pragma once

// Tracks the yes/no answer probabilities for the misinterpretation question
// after each chunk, and scores the end-of-sentence answer.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpprobe/bundle.h"
#include "gpprobe/corpus.h"
#include "gpprobe/stats.h"
#include "gpprobe/table.h"

namespace gpprobe {

struct TrajectoryPoint {
  std::string item_id;
  Variant variant = Variant::kCommaAbsent;
  int prefix_index = 0;
  double p_yes = 0.0;
  double p_no = 0.0;
  double p_yes_normalized = 0.0;
  // Set when p_yes + p_no == 0; such points are excluded from means.
  bool undefined = false;
};

TrajectoryPoint MakeTrajectoryPoint(const std::string& item_id, Variant variant,
                                    int prefix_index, const AnswerProbs& probs);

struct PrefixAnswer {
  int prefix_index = 0;
  AnswerProbs probs;
};

// Five points ordered by prefix. Throws naming (item, variant, k) when a
// prefix is missing or duplicated.
std::vector<TrajectoryPoint> Trajectory(const std::string& item_id, Variant variant,
                                        std::span<const PrefixAnswer> answers);

enum class FinalAnswer { kRejectsMisinterpretation, kEndorsesMisinterpretation };

std::string_view ToString(FinalAnswer a);

// Rejects iff the normalized "yes" probability is strictly below 0.5.
// Throws for an undefined point.
FinalAnswer JudgeFinalAnswer(const TrajectoryPoint& point);

struct ClassAccuracy {
  int n_items = 0;
  int n_rejecting = 0;
  double accuracy = 0.0;
};

struct AccuracySummary {
  std::string model_id;
  Variant variant = Variant::kCommaAbsent;
  int n_items = 0;
  int n_rejecting = 0;
  double accuracy = 0.0;
  ClassAccuracy ot;
  ClassAccuracy rat;
  int excluded = 0;  // items whose final point was undefined
};

// `final_points` are the prefix-5 points, one per corpus item, for a single
// variant. Throws on an empty corpus or when an item has no point.
AccuracySummary SummarizeAccuracy(const std::string& model_id, Variant variant,
                                  const std::vector<GardenPathItem>& corpus,
                                  const std::vector<TrajectoryPoint>& final_points);

// Published human rejection rates for the misinterpretation question, in
// percent.
struct HumanBaseline {
  std::string_view label;
  double comma_absent;
  double comma_present;
};

inline constexpr HumanBaseline kHumanQuestionAnswering{"Human (question answering)", 35.40,
                                                       73.40};
inline constexpr HumanBaseline kHumanParaphrase{"Human (paraphrase)", 21.00, 62.00};

// Paired t-test over per-item 0/1 rejection outcomes, comma-present minus
// comma-absent. Items are paired by id; unpaired items are ignored.
stats::StatsResult CommaEffectTest(const std::map<std::string, FinalAnswer>& comma_absent,
                                   const std::map<std::string, FinalAnswer>& comma_present);

// Equal-weight mean across items per prefix; undefined points are skipped
// and counted.
struct MeanTrajectoryPoint {
  int prefix_index = 0;
  double mean_p_yes = 0.0;
  double mean_p_no = 0.0;
  double mean_p_yes_normalized = 0.0;
  int n = 0;
  int excluded = 0;
};

std::vector<MeanTrajectoryPoint> MeanTrajectory(std::span<const TrajectoryPoint> points);

// Columns: model, item, variant, chunk, p_yes, p_no, p_yes_norm. Undefined
// normalized values are written as "nan".
CsvTable TrajectoryTable(const std::string& model_id,
                         std::span<const TrajectoryPoint> points);
std::vector<TrajectoryPoint> TrajectoriesFromTable(const CsvTable& table,
                                                   const std::string& where);

}  // namespace gpprobe
