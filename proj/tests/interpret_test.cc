#include "gpprobe/interpret.h"

#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "fixtures.h"
#include "gpprobe/error.h"

namespace gpprobe {
namespace {

using ::testing::HasSubstr;

std::vector<PrefixAnswer> Constant(double yes, double no) {
  std::vector<PrefixAnswer> out;
  for (int k = 1; k <= kNumChunks; ++k) out.push_back({k, {yes, no}});
  return out;
}

TEST(Trajectory, NormalizesEachChunk) {
  const auto points = Trajectory("i", Variant::kCommaAbsent, Constant(0.6, 0.2));
  ASSERT_EQ(points.size(), 5u);
  for (int k = 0; k < kNumChunks; ++k) {
    EXPECT_EQ(points[k].prefix_index, k + 1);
    EXPECT_DOUBLE_EQ(points[k].p_yes_normalized, 0.75);
  }
}

TEST(Trajectory, SymmetricIsHalf) {
  EXPECT_DOUBLE_EQ(MakeTrajectoryPoint("i", Variant::kCommaAbsent, 1, {0.5, 0.5}).p_yes_normalized,
                   0.5);
}

TEST(Trajectory, ZeroMassIsUndefinedAndExcluded) {
  const auto p = MakeTrajectoryPoint("i", Variant::kCommaAbsent, 5, {0.0, 0.0});
  EXPECT_TRUE(p.undefined);
  EXPECT_THROW(JudgeFinalAnswer(p), Error);
  std::vector<TrajectoryPoint> pts{p, MakeTrajectoryPoint("j", Variant::kCommaAbsent, 5, {0.3, 0.1})};
  const auto mean = MeanTrajectory(pts);
  EXPECT_EQ(mean[4].n, 1);
  EXPECT_EQ(mean[4].excluded, 1);
  EXPECT_DOUBLE_EQ(mean[4].mean_p_yes_normalized, 0.75);
}

TEST(Trajectory, MissingPrefixNamed) {
  auto answers = Constant(0.5, 0.2);
  answers.erase(answers.begin() + 2);
  try {
    Trajectory("item-x", Variant::kCommaPresent, answers);
    FAIL();
  } catch (const Error& e) {
    EXPECT_THAT(e.what(), HasSubstr("item-x"));
    EXPECT_THAT(e.what(), HasSubstr("comma_present"));
    EXPECT_THAT(e.what(), HasSubstr("3"));
  }
}

TrajectoryPoint Final(double normalized) {
  TrajectoryPoint p;
  p.prefix_index = 5;
  p.p_yes = normalized;
  p.p_no = 1.0 - normalized;
  p.p_yes_normalized = normalized;
  return p;
}

TEST(FinalAnswer, ThresholdRule) {
  EXPECT_EQ(JudgeFinalAnswer(Final(0.49)), FinalAnswer::kRejectsMisinterpretation);
  EXPECT_EQ(JudgeFinalAnswer(Final(0.50)), FinalAnswer::kEndorsesMisinterpretation);
  EXPECT_EQ(JudgeFinalAnswer(Final(0.51)), FinalAnswer::kEndorsesMisinterpretation);
}

TEST(FinalAnswer, ScaleInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> logc(-6.0, 6.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double yes = u(rng), no = u(rng) * (1.0 - yes);
    const double c = std::pow(10.0, logc(rng));
    const auto a = MakeTrajectoryPoint("i", Variant::kCommaAbsent, 5, {yes, no});
    const auto b = MakeTrajectoryPoint("i", Variant::kCommaAbsent, 5, {yes * c, no * c});
    EXPECT_NEAR(a.p_yes_normalized, b.p_yes_normalized, 1e-12);
    if (std::abs(a.p_yes_normalized - 0.5) > 1e-12) {
      EXPECT_EQ(JudgeFinalAnswer(a), JudgeFinalAnswer(b));
    }
  }
}

std::vector<GardenPathItem> Items(int n_ot, int n_rat) {
  std::vector<GardenPathItem> items;
  for (int i = 0; i < n_ot + n_rat; ++i) {
    GardenPathItem item = HunterDeerItem();
    item.id = "item-" + std::to_string(i);
    item.verb_class = i < n_ot ? VerbClass::kOT : VerbClass::kRAT;
    items.push_back(item);
  }
  return items;
}

TEST(Accuracy, FourOfTwentyFour) {
  const auto items = Items(12, 12);
  std::vector<TrajectoryPoint> finals;
  for (int i = 0; i < 24; ++i) {
    TrajectoryPoint p = Final(i < 4 ? 0.3 : 0.7);
    p.item_id = items[i].id;
    finals.push_back(p);
  }
  const auto s = SummarizeAccuracy("m", Variant::kCommaAbsent, items, finals);
  EXPECT_EQ(s.n_items, 24);
  EXPECT_EQ(s.n_rejecting, 4);
  EXPECT_NEAR(s.accuracy * 100.0, 16.67, 0.005);
  EXPECT_EQ(s.ot.n_rejecting, 4);
  EXPECT_EQ(s.rat.n_rejecting, 0);
}

TEST(Accuracy, HumanBaselines) {
  EXPECT_EQ(kHumanQuestionAnswering.comma_absent, 35.40);
  EXPECT_EQ(kHumanQuestionAnswering.comma_present, 73.40);
  EXPECT_EQ(kHumanParaphrase.comma_absent, 21.00);
  EXPECT_EQ(kHumanParaphrase.comma_present, 62.00);
}

TEST(Accuracy, PermutationInvariantAndClassWeighted) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_ot = 1 + trial % 7, n_rat = 1 + trial % 5;
    auto items = Items(n_ot, n_rat);
    std::vector<TrajectoryPoint> finals;
    for (const auto& item : items) {
      TrajectoryPoint p = Final(u(rng));
      p.item_id = item.id;
      p.variant = Variant::kCommaPresent;
      finals.push_back(p);
    }
    const auto a = SummarizeAccuracy("m", Variant::kCommaPresent, items, finals);
    std::shuffle(items.begin(), items.end(), rng);
    std::shuffle(finals.begin(), finals.end(), rng);
    const auto b = SummarizeAccuracy("m", Variant::kCommaPresent, items, finals);
    EXPECT_EQ(a.n_rejecting, b.n_rejecting);
    EXPECT_DOUBLE_EQ(a.accuracy, b.accuracy);
    EXPECT_GE(a.ot.accuracy, 0.0);
    EXPECT_LE(a.ot.accuracy, 1.0);
    EXPECT_GE(a.rat.accuracy, 0.0);
    EXPECT_LE(a.rat.accuracy, 1.0);
    EXPECT_NEAR((a.ot.accuracy * n_ot + a.rat.accuracy * n_rat) / (n_ot + n_rat), a.accuracy,
                1e-12);
  }
}

TEST(Accuracy, MissingItemRejected) {
  const auto items = Items(2, 0);
  TrajectoryPoint p = Final(0.2);
  p.item_id = items[0].id;
  EXPECT_THROW(SummarizeAccuracy("m", Variant::kCommaAbsent, items, {p}), Error);
}

TEST(CommaEffect, IdenticalPairsAreDegenerate) {
  std::map<std::string, FinalAnswer> a, p;
  for (int i = 0; i < 5; ++i) {
    a["i" + std::to_string(i)] = p["i" + std::to_string(i)] = FinalAnswer::kRejectsMisinterpretation;
  }
  const auto r = CommaEffectTest(a, p);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.note, "degenerate: no variance");
}

TEST(CommaEffect, CommaHelpsEverywhere) {
  std::map<std::string, FinalAnswer> a, p;
  for (int i = 0; i < 6; ++i) {
    a["i" + std::to_string(i)] = FinalAnswer::kEndorsesMisinterpretation;
    p["i" + std::to_string(i)] = FinalAnswer::kRejectsMisinterpretation;
  }
  const auto r = CommaEffectTest(a, p);
  EXPECT_EQ(r.direction, 1);
  EXPECT_EQ(r.p, 0.0);
}

TEST(CommaEffect, MixedOutcomesMatchOracle) {
  // Differences present - absent: [1, 1, 0, 1, -1].
  const FinalAnswer R = FinalAnswer::kRejectsMisinterpretation;
  const FinalAnswer E = FinalAnswer::kEndorsesMisinterpretation;
  std::map<std::string, FinalAnswer> a{{"a", E}, {"b", E}, {"c", R}, {"d", E}, {"e", R}};
  std::map<std::string, FinalAnswer> p{{"a", R}, {"b", R}, {"c", R}, {"d", R}, {"e", E}, {"x", R}};
  const auto r = CommaEffectTest(a, p);
  EXPECT_EQ(r.n, 5);
  const double mean = 0.4;
  const double sd = std::sqrt((3 * 0.36 + 0.16 + 1.96) / 4.0);
  const double t = mean / (sd / std::sqrt(5.0));
  EXPECT_NEAR(r.t, t, 1e-12);
  boost::math::students_t dist(4.0);
  EXPECT_NEAR(r.p, 2 * boost::math::cdf(boost::math::complement(dist, t)), 1e-10);
}

TEST(Trajectory, TableRoundTrips) {
  std::vector<TrajectoryPoint> pts = Trajectory("i", Variant::kCommaPresent, Constant(0.3, 0.1));
  pts.push_back(MakeTrajectoryPoint("j", Variant::kCommaAbsent, 5, {0.0, 0.0}));
  const CsvTable t = TrajectoryTable("m", pts);
  const auto back = TrajectoriesFromTable(ParseCsv(ToCsv(t), "t"), "t");
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(back[i].item_id, pts[i].item_id);
    EXPECT_EQ(back[i].p_yes, pts[i].p_yes);
    EXPECT_EQ(back[i].undefined, pts[i].undefined);
  }
}

}  // namespace
}  // namespace gpprobe
