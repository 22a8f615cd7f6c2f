#include "gpprobe/interpret.h"

#include <algorithm>
#include <cmath>

#include "gpprobe/error.h"

namespace gpprobe {

TrajectoryPoint MakeTrajectoryPoint(const std::string& item_id, Variant variant,
                                    int prefix_index, const AnswerProbs& probs) {
  TrajectoryPoint p;
  p.item_id = item_id;
  p.variant = variant;
  p.prefix_index = prefix_index;
  p.p_yes = probs.p_yes;
  p.p_no = probs.p_no;
  const double mass = probs.p_yes + probs.p_no;
  if (mass > 0.0) {
    p.p_yes_normalized = probs.p_yes / mass;
  } else {
    p.undefined = true;
    p.p_yes_normalized = std::nan("");
  }
  return p;
}

std::vector<TrajectoryPoint> Trajectory(const std::string& item_id, Variant variant,
                                        std::span<const PrefixAnswer> answers) {
  std::vector<std::optional<AnswerProbs>> by_prefix(kNumChunks);
  const std::string who =
      "(" + item_id + ", " + std::string(ToString(variant)) + ", ";
  for (const PrefixAnswer& a : answers) {
    if (a.prefix_index < 1 || a.prefix_index > kNumChunks) {
      throw ValidationError("trajectory " + who + std::to_string(a.prefix_index) +
                            "): prefix out of range");
    }
    auto& slot = by_prefix[a.prefix_index - 1];
    if (slot) {
      throw ValidationError("trajectory " + who + std::to_string(a.prefix_index) +
                            "): duplicate prefix");
    }
    slot = a.probs;
  }
  std::vector<TrajectoryPoint> out;
  for (int k = 1; k <= kNumChunks; ++k) {
    if (!by_prefix[k - 1]) {
      throw ValidationError("trajectory " + who + std::to_string(k) +
                            "): missing prefix");
    }
    out.push_back(MakeTrajectoryPoint(item_id, variant, k, *by_prefix[k - 1]));
  }
  return out;
}

std::string_view ToString(FinalAnswer a) {
  return a == FinalAnswer::kRejectsMisinterpretation ? "rejects" : "endorses";
}

FinalAnswer JudgeFinalAnswer(const TrajectoryPoint& point) {
  if (point.undefined) {
    throw ValidationError("final answer for item '" + point.item_id +
                          "': degenerate point (p_yes + p_no = 0)");
  }
  return point.p_yes_normalized < 0.5 ? FinalAnswer::kRejectsMisinterpretation
                                      : FinalAnswer::kEndorsesMisinterpretation;
}

AccuracySummary SummarizeAccuracy(const std::string& model_id, Variant variant,
                                  const std::vector<GardenPathItem>& corpus,
                                  const std::vector<TrajectoryPoint>& final_points) {
  if (corpus.empty()) throw ValidationError("accuracy summary: empty corpus");
  std::map<std::string, const TrajectoryPoint*> by_item;
  for (const auto& p : final_points) {
    if (p.variant != variant) continue;
    if (!by_item.emplace(p.item_id, &p).second) {
      throw ValidationError("accuracy summary: two final answers for item '" +
                            p.item_id + "'");
    }
  }
  AccuracySummary s;
  s.model_id = model_id;
  s.variant = variant;
  for (const auto& item : corpus) {
    const auto it = by_item.find(item.id);
    if (it == by_item.end()) {
      throw ValidationError("accuracy summary: no final answer for item '" + item.id + "'");
    }
    if (it->second->undefined) {
      ++s.excluded;
      continue;
    }
    const bool rejects =
        JudgeFinalAnswer(*it->second) == FinalAnswer::kRejectsMisinterpretation;
    ClassAccuracy& c = item.verb_class == VerbClass::kOT ? s.ot : s.rat;
    ++s.n_items;
    ++c.n_items;
    if (rejects) {
      ++s.n_rejecting;
      ++c.n_rejecting;
    }
  }
  const auto rate = [](int k, int n) { return n > 0 ? double(k) / double(n) : 0.0; };
  s.accuracy = rate(s.n_rejecting, s.n_items);
  s.ot.accuracy = rate(s.ot.n_rejecting, s.ot.n_items);
  s.rat.accuracy = rate(s.rat.n_rejecting, s.rat.n_items);
  return s;
}

stats::StatsResult CommaEffectTest(const std::map<std::string, FinalAnswer>& comma_absent,
                                   const std::map<std::string, FinalAnswer>& comma_present) {
  std::vector<double> present;
  std::vector<double> absent;
  for (const auto& [id, answer] : comma_absent) {
    const auto it = comma_present.find(id);
    if (it == comma_present.end()) continue;
    absent.push_back(answer == FinalAnswer::kRejectsMisinterpretation ? 1.0 : 0.0);
    present.push_back(it->second == FinalAnswer::kRejectsMisinterpretation ? 1.0 : 0.0);
  }
  if (present.size() < 2) {
    throw ValidationError("comma effect test: fewer than 2 paired items");
  }
  stats::StatsResult r = stats::PairedT(present, absent);
  r.test_name = "comma_effect_paired_t";
  return r;
}

std::vector<MeanTrajectoryPoint> MeanTrajectory(std::span<const TrajectoryPoint> points) {
  std::vector<MeanTrajectoryPoint> out(kNumChunks);
  for (int k = 0; k < kNumChunks; ++k) out[k].prefix_index = k + 1;
  for (const auto& p : points) {
    if (p.prefix_index < 1 || p.prefix_index > kNumChunks) continue;
    MeanTrajectoryPoint& m = out[p.prefix_index - 1];
    if (p.undefined) {
      ++m.excluded;
      continue;
    }
    m.mean_p_yes += p.p_yes;
    m.mean_p_no += p.p_no;
    m.mean_p_yes_normalized += p.p_yes_normalized;
    ++m.n;
  }
  for (auto& m : out) {
    if (m.n == 0) {
      m.mean_p_yes = m.mean_p_no = m.mean_p_yes_normalized = std::nan("");
      continue;
    }
    m.mean_p_yes /= m.n;
    m.mean_p_no /= m.n;
    m.mean_p_yes_normalized /= m.n;
  }
  return out;
}

CsvTable TrajectoryTable(const std::string& model_id,
                         std::span<const TrajectoryPoint> points) {
  CsvTable t;
  t.header = {"model", "item", "variant", "chunk", "p_yes", "p_no", "p_yes_norm"};
  for (const auto& p : points) {
    t.rows.push_back({model_id, p.item_id, std::string(ToString(p.variant)),
                      std::to_string(p.prefix_index), FormatShortest(p.p_yes),
                      FormatShortest(p.p_no),
                      p.undefined ? "nan" : FormatShortest(p.p_yes_normalized)});
  }
  return t;
}

std::vector<TrajectoryPoint> TrajectoriesFromTable(const CsvTable& table,
                                                   const std::string& where) {
  std::vector<TrajectoryPoint> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string w = where + " row " + std::to_string(r + 2);
    AnswerProbs probs{ParseDouble(table.Cell(r, "p_yes"), w),
                      ParseDouble(table.Cell(r, "p_no"), w)};
    out.push_back(MakeTrajectoryPoint(table.Cell(r, "item"),
                                      ParseVariant(table.Cell(r, "variant")),
                                      ParseInt(table.Cell(r, "chunk"), w), probs));
  }
  return out;
}

}  // namespace gpprobe
