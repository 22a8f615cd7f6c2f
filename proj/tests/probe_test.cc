#include "gpprobe/probe.h"

#include <cmath>
#include <numeric>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "fixtures.h"
#include "gpprobe/error.h"
#include "gpprobe/mst.h"

namespace gpprobe {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

std::vector<double> Identity(int d) {
  std::vector<double> m(d * d, 0.0);
  for (int i = 0; i < d; ++i) m[i * d + i] = 1.0;
  return m;
}

std::vector<double> RandomVector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

// Independent oracle: naive matrix-vector product and sum of squares.
double NaiveDistance(const std::vector<double>& b, int k, int d, const std::vector<double>& x,
                     const std::vector<double>& y) {
  double total = 0.0;
  for (int r = 0; r < k; ++r) {
    double acc = 0.0;
    for (int c = 0; c < d; ++c) acc += b[r * d + c] * (x[c] - y[c]);
    total += acc * acc;
  }
  return total;
}

TEST(Probe, IdenticalVectorsHaveZeroDistance) {
  std::mt19937_64 rng(1);
  const StructuralProbe p(4, 6, 0, RandomVector(24, rng));
  const auto h = RandomVector(6, rng);
  EXPECT_EQ(p.Distance(h, h), 0.0);
}

TEST(Probe, IdentityGivesSquaredEuclidean) {
  const StructuralProbe p(5, 5, 0, Identity(5));
  EXPECT_DOUBLE_EQ(p.Distance(std::vector<double>{3, 4, 0, 0, 0},
                              std::vector<double>(5, 0.0)),
                   25.0);
}

TEST(Probe, MatchesNaiveMatmulOracle) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 17;
    const int k = 1 + trial % d;
    const auto b = RandomVector(k * d, rng);
    const StructuralProbe p(k, d, 0, b);
    const auto x = RandomVector(d, rng);
    const auto y = RandomVector(d, rng);
    const double oracle = NaiveDistance(b, k, d, x, y);
    EXPECT_NEAR(p.Distance(x, y), oracle, 1e-10 * std::max(1.0, oracle));
    EXPECT_EQ(p.Distance(x, y), p.Distance(y, x));
    EXPECT_GE(p.Distance(x, y), 0.0);
  }
}

TEST(Probe, ConstructorValidates) {
  EXPECT_THROW(StructuralProbe(0, 4, 0, {}), Error);
  EXPECT_THROW(StructuralProbe(5, 4, 0, std::vector<double>(20, 0.0)), Error);
  EXPECT_THROW(StructuralProbe(2, 4, 0, std::vector<double>(7, 0.0)), Error);
  EXPECT_THROW(StructuralProbe(1, 1, 0, std::vector<double>{NAN}), Error);
  const StructuralProbe p(2, 4, 0, std::vector<double>(8, 1.0));
  EXPECT_THROW(p.Distance(std::vector<double>(3), std::vector<double>(4)), Error);
}

TrainingSentence RandomSentence(int n, int d, std::mt19937_64& rng) {
  WordMatrix words(n, d);
  words.data = RandomVector(static_cast<std::size_t>(n) * d, rng);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  std::vector<double> target(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) target[i * n + j] = target[j * n + i] = u(rng);
  }
  return {words, target};
}

TEST(Probe, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const int d = 8, k = 4, n = 5;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = RandomSentence(n, d, rng);
    StructuralProbe p(k, d, 0, RandomVector(k * d, rng));
    std::vector<double> grad(k * d);
    SentenceLoss(p, s, grad);
    const double h = 1e-6;
    for (int i = 0; i < k * d; ++i) {
      const double orig = p.matrix()[i];
      p.mutable_matrix()[i] = orig + h;
      const double up = SentenceLoss(p, s);
      p.mutable_matrix()[i] = orig - h;
      const double down = SentenceLoss(p, s);
      p.mutable_matrix()[i] = orig;
      const double fd = (up - down) / (2 * h);
      EXPECT_LE(std::abs(fd - grad[i]), 1e-4 * std::max(1.0, std::abs(fd))) << i;
    }
  }
}

TEST(Probe, LossMatchesDefinition) {
  std::mt19937_64 rng(4);
  const auto s = RandomSentence(4, 3, rng);
  const auto b = RandomVector(6, rng);
  const StructuralProbe p(2, 3, 0, b);
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const std::vector<double> x(s.words.row(i).begin(), s.words.row(i).end());
      const std::vector<double> y(s.words.row(j).begin(), s.words.row(j).end());
      expected += std::abs(NaiveDistance(b, 2, 3, x, y) - s.target[i * 4 + j]);
    }
  }
  EXPECT_NEAR(SentenceLoss(p, s), expected / 16.0, 1e-12);
}

TEST(Probe, TwoWordSentenceConverges) {
  std::mt19937_64 rng(5);
  WordMatrix words(2, 6);
  words.data = RandomVector(12, rng);
  const GoldTree gold = MakeGoldTree("pair", 2, {Edge{0, 1}});
  TrainingConfig config;
  config.rank = 3;
  config.learning_rate = 0.05;
  config.epochs = 300;
  config.seed = 9;
  const TrainResult r = TrainProbe({MakeTrainingSentence(words, gold)}, 6, config);
  EXPECT_LE(std::abs(r.probe.Distance(words.row(0), words.row(1)) - 1.0), 0.05);
}

TEST(Probe, TrainingIsBitReproducible) {
  testing::TempDir tmp;
  std::mt19937_64 rng(6);
  std::vector<TrainingSentence> data;
  for (int i = 0; i < 6; ++i) {
    const int n = 3 + i % 3;
    WordMatrix words(n, 8);
    words.data = RandomVector(n * 8, rng);
    data.push_back(MakeTrainingSentence(words, MakeGoldTree("s", n, testing::RandomTree(n, rng))));
  }
  TrainingConfig config;
  config.rank = 4;
  config.epochs = 10;
  config.seed = 42;
  config.batch_size = 2;
  const auto a = TrainProbe(data, 8, config);
  const auto b = TrainProbe(data, 8, config);
  EXPECT_EQ(std::vector<double>(a.probe.matrix().begin(), a.probe.matrix().end()),
            std::vector<double>(b.probe.matrix().begin(), b.probe.matrix().end()));
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  config.seed = 43;
  const auto c = TrainProbe(data, 8, config);
  EXPECT_NE(std::vector<double>(a.probe.matrix().begin(), a.probe.matrix().end()),
            std::vector<double>(c.probe.matrix().begin(), c.probe.matrix().end()));
}

TEST(Probe, TrainingRejectsBadInput) {
  TrainingConfig config;
  config.rank = 2;
  EXPECT_THROW(TrainProbe({}, 4, config), Error);
  WordMatrix one(1, 4);
  EXPECT_THROW(TrainProbe({TrainingSentence{one, {0.0}}}, 4, config), Error);
  WordMatrix two(2, 3);
  EXPECT_THROW(TrainProbe({TrainingSentence{two, {0, 1, 1, 0}}}, 4, config), Error);
}

TEST(Probe, SaveAndLoadRoundTrip) {
  testing::TempDir tmp;
  std::mt19937_64 rng(7);
  TrainingConfig config;
  config.seed = 77;
  config.rank = 3;
  const StructuralProbe p(3, 5, 2, RandomVector(15, rng), config);
  WriteProbe(p, tmp.path() / "p.bin");
  const StructuralProbe q = ReadProbe(tmp.path() / "p.bin");
  EXPECT_EQ(q.rank(), 3);
  EXPECT_EQ(q.hidden_dim(), 5);
  EXPECT_EQ(q.layer(), 2);
  EXPECT_EQ(q.config().seed, 77u);
  for (int i = 0; i < 15; ++i) {
    EXPECT_EQ(q.matrix()[i], static_cast<double>(static_cast<float>(p.matrix()[i])));
  }
  testing::WriteText(tmp.path() / "bad.bin", "{\"format\":\"other\"}\n");
  EXPECT_THROW(ReadProbe(tmp.path() / "bad.bin"), Error);
}

TEST(Uuas, Examples) {
  const GoldTree path = MakeGoldTree("g", 4, {Edge{0, 1}, Edge{1, 2}, Edge{2, 3}});
  EXPECT_DOUBLE_EQ(Uuas(path.edges, path), 1.0);
  // Star at 1 shares {0-1, 1-2} with the path.
  EXPECT_DOUBLE_EQ(Uuas({Edge{0, 1}, Edge{1, 2}, Edge{1, 3}}, path), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(Uuas({Edge{0, 2}}, {Edge{0, 1}, Edge{1, 2}}, 3), 0.0);
  EXPECT_DOUBLE_EQ(Uuas({Edge{2, 1}, Edge{1, 0}}, {Edge{0, 1}, Edge{1, 2}}, 3), 1.0);
  EXPECT_DOUBLE_EQ(Uuas({}, {}, 1), 1.0);
  EXPECT_THROW(Uuas({Edge{0, 1}}, path), Error);
  EXPECT_THROW(Uuas({Edge{0, 1}, Edge{1, 2}, Edge{2, 4}}, path), Error);
}

// Words: 0 np, 1 verb1, 2 verb2, plus fillers.
const RoleWords kRoles{1, 0, 2};

TEST(Attachment, NearerSecondVerbIsCorrect) {
  // np - ran (1 edge), np - x - y - hunted (3 edges).
  const std::vector<Edge> tree{Edge{0, 2}, Edge{0, 3}, Edge{3, 4}, Edge{1, 4}};
  EXPECT_EQ(JudgeAttachment(tree, 5, kRoles), AttachmentVerdict::kCorrect);
}

TEST(Attachment, AdjacentToFirstVerbIsMisinterpretation) {
  const std::vector<Edge> tree{Edge{0, 1}, Edge{1, 3}, Edge{2, 3}};
  EXPECT_EQ(JudgeAttachment(tree, 4, kRoles), AttachmentVerdict::kMisinterpretation);
}

TEST(Attachment, TieIsOther) {
  const std::vector<Edge> tree{Edge{0, 1}, Edge{0, 2}};
  EXPECT_EQ(JudgeAttachment(tree, 3, kRoles), AttachmentVerdict::kOther);
}

TEST(Attachment, MissingRoleIsOther) {
  const std::vector<Edge> tree{Edge{0, 1}, Edge{1, 2}};
  EXPECT_EQ(JudgeAttachment(tree, 3, RoleWords{1, 5, 2}), AttachmentVerdict::kOther);
  EXPECT_EQ(JudgeAttachment(tree, 3, RoleWords{-1, 0, 2}), AttachmentVerdict::kOther);
  EXPECT_EQ(JudgeAttachment({}, 1, RoleWords{0, 1, 2}), AttachmentVerdict::kOther);
}

TEST(Attachment, SecondVerbBeyondPrefixCountsAsFar) {
  const std::vector<Edge> tree{Edge{0, 1}};
  EXPECT_EQ(JudgeAttachment(tree, 2, RoleWords{1, 0, 7}), AttachmentVerdict::kMisinterpretation);
}

TEST(Attachment, InvariantUnderRelabelingFillers) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + trial % 6;
    const auto tree = testing::RandomTree(n, rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin() + 3, perm.end(), rng);
    std::vector<Edge> relabeled;
    for (const Edge& e : tree) relabeled.push_back(Edge::Make(perm[e.a], perm[e.b]));
    EXPECT_EQ(JudgeAttachment(tree, n, kRoles), JudgeAttachment(relabeled, n, kRoles));
  }
}

// Bundle whose layer-0 word vectors embed `tree` exactly: each word is the
// sum of orthonormal directions for the edges on its path from word 0.
Bundle TreeBundle(const GardenPathItem& item, Variant v, int prefix,
                  const std::vector<Edge>& tree) {
  testing::SyntheticModel model;
  model.n_layers = 1;
  model.hidden_dim = 16;
  testing::BundleFiles f = testing::MakeSyntheticBundle(item, v, prefix, model);
  const int n = f.manifest.num_words();
  const int T = f.manifest.num_tokens();
  std::vector<std::vector<double>> x(n, std::vector<double>(16, 0.0));
  std::vector<bool> done(n, false);
  done[0] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (const Edge& e : tree) {
      if (done[e.a] == done[e.b]) continue;
      const int parent = done[e.a] ? e.a : e.b;
      const int child = done[e.a] ? e.b : e.a;
      x[child] = x[parent];
      x[child][child] += 1.0;
      done[child] = changed = true;
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int d = 0; d < 16; ++d) f.hidden[t * 16 + d] = static_cast<float>(x[f.manifest.word_of_token[t]][d]);
  }
  Bundle b;
  b.manifest = f.manifest;
  b.activations.hidden = FloatTensor({2, static_cast<std::size_t>(T), 16}, f.hidden);
  return b;
}

StructuralProbe IdentityProbe() { return StructuralProbe(16, 16, 0, Identity(16)); }

TEST(Snapshot, FullPrefixWithCorrectParse) {
  const auto item = HunterDeerItem();
  // deer(5) attaches to ran(11); hunted(3) heads the subordinate clause.
  const std::vector<Edge> parse{{0, 3},  {1, 2},  {2, 3},  {3, 11}, {4, 5},
                                {5, 11}, {6, 7},  {5, 7},  {7, 8},  {8, 9},
                                {8, 10}, {11, 12}, {13, 14}, {12, 14}};
  for (Variant v : {Variant::kCommaAbsent, Variant::kCommaPresent}) {
    const auto snap = ExtractSnapshot(IdentityProbe(), TreeBundle(item, v, 5, parse), item);
    EXPECT_EQ(snap.words.size(), 15u);
    auto sorted = parse;
    for (Edge& e : sorted) e = Edge::Make(e.a, e.b);
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(snap.edges, sorted);
    EXPECT_EQ(snap.verdict, AttachmentVerdict::kCorrect);
  }
}

TEST(Snapshot, PrefixTwoLinkingDeerToHunted) {
  const auto item = HunterDeerItem();
  const std::vector<Edge> parse{{0, 3}, {1, 2}, {2, 3}, {3, 5}, {4, 5}};
  const auto snap =
      ExtractSnapshot(IdentityProbe(), TreeBundle(item, Variant::kCommaAbsent, 2, parse), item);
  EXPECT_THAT(snap.words, ElementsAre("While", "the", "man", "hunted", "the", "deer"));
  EXPECT_EQ(snap.verdict, AttachmentVerdict::kMisinterpretation);
}

TEST(Snapshot, PrefixOneIsOther) {
  const auto item = HunterDeerItem();
  const std::vector<Edge> parse{{0, 3}, {1, 2}, {2, 3}};
  const auto snap =
      ExtractSnapshot(IdentityProbe(), TreeBundle(item, Variant::kCommaPresent, 1, parse), item);
  EXPECT_EQ(snap.words.back(), "hunted,");
  EXPECT_EQ(snap.verdict, AttachmentVerdict::kOther);
}

TEST(Snapshot, DimensionMismatchRejected) {
  const auto item = HunterDeerItem();
  const Bundle b = TreeBundle(item, Variant::kCommaAbsent, 5, {});
  try {
    ExtractSnapshot(StructuralProbe(4, 8, 0, std::vector<double>(32, 1.0)), b, item);
    FAIL();
  } catch (const Error& e) {
    EXPECT_THAT(e.what(), HasSubstr("probe/bundle dimension mismatch"));
  }
}

TEST(PoolWords, AveragesSubwordTokens) {
  const FloatTensor hidden({1, 3, 2}, {1, 2, 3, 4, 10, 20});
  const std::vector<int> wot{0, 0, 1};
  const WordMatrix w = PoolWords(hidden, 0, wot);
  ASSERT_EQ(w.n, 2);
  EXPECT_THAT(w.data, ElementsAre(2, 3, 10, 20));
}

}  // namespace
}  // namespace gpprobe
