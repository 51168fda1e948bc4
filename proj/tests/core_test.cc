#include "dwc/core.h"

#include <gtest/gtest.h>

#include <random>

#include "test_util.h"

namespace dwc {
namespace {

using testing::RelationNames;

RelationDistribution Dist(std::vector<RelationEntry> entries) {
  return RelationDistribution::FromEntries(std::move(entries), false);
}

TEST(NormalizeTest, ProportionsOfCounts) {
  RelationDistribution d = Normalize({{0, 40}, {1, 20}, {2, 20}});
  ASSERT_EQ(d.size(), 3u);
  EXPECT_DOUBLE_EQ(d.Get(0), 0.5);
  EXPECT_DOUBLE_EQ(d.Get(1), 0.25);
  EXPECT_DOUBLE_EQ(d.Get(2), 0.25);
  EXPECT_FALSE(d.truncated());
}

TEST(NormalizeTest, SingleRelation) {
  RelationDistribution d = Normalize({{4, 7}});
  EXPECT_EQ(d.entries(), (std::vector<RelationEntry>{{4, 1.0}}));
}

TEST(NormalizeTest, EmptyOrZeroIsAnError) {
  EXPECT_DWC_ERROR(Normalize({}), ErrorCode::kEmptyUsage);
  EXPECT_DWC_ERROR(Normalize({{0, 0}, {1, 0}}), ErrorCode::kEmptyUsage);
  std::vector<double> zeros(3, 0.0);
  EXPECT_DWC_ERROR(NormalizeDense(zeros), ErrorCode::kEmptyUsage);
}

TEST(NormalizeTest, ZeroCountsAreDropped) {
  RelationDistribution d = Normalize({{0, 3}, {1, 0}, {2, 1}});
  EXPECT_EQ(d.size(), 2u);
  EXPECT_FALSE(d.Contains(1));
  EXPECT_DOUBLE_EQ(d.Get(1), 0.0);
}

TEST(NormalizeTest, DenseIgnoresNegatives) {
  std::vector<double> raw = {0.5, -0.1, 0.6};
  RelationDistribution d = NormalizeDense(raw);
  EXPECT_NEAR(d.Get(0), 0.5 / 1.1, 1e-15);
  EXPECT_NEAR(d.Get(2), 0.6 / 1.1, 1e-15);
  EXPECT_FALSE(d.Contains(1));
}

TEST(TruncateTest, StopsWhenCumulativeMassReachesThreshold) {
  auto names = RelationNames(4);  // a=r00, b=r01, c=r02, d=r03
  RelationDistribution d = Dist({{0, 0.5}, {1, 0.3}, {2, 0.15}, {3, 0.05}});
  RelationDistribution t = TruncateToMass(d, 0.95, names);
  EXPECT_TRUE(t.truncated());
  EXPECT_EQ(t.entries(),
            (std::vector<RelationEntry>{{0, 0.5}, {1, 0.3}, {2, 0.15}}));
  EXPECT_NEAR(t.Mass(), 0.95, 1e-15);
}

TEST(TruncateTest, SingleRelationKept) {
  auto names = RelationNames(1);
  RelationDistribution t = TruncateToMass(Dist({{0, 1.0}}), 0.95, names);
  EXPECT_EQ(t.entries(), (std::vector<RelationEntry>{{0, 1.0}}));
}

TEST(TruncateTest, ThresholdOneKeepsEverything) {
  auto names = RelationNames(2);
  RelationDistribution t = TruncateToMass(Dist({{0, 0.5}, {1, 0.5}}), 1.0, names);
  EXPECT_EQ(t.size(), 2u);
}

TEST(TruncateTest, TiesBrokenByRelationName) {
  // Index order differs from name order: index 0 is "zeta", index 1 "alpha".
  std::vector<std::string> names = {"zeta", "alpha", "mid"};
  RelationDistribution d = Dist({{0, 0.4}, {1, 0.4}, {2, 0.2}});
  RelationDistribution t = TruncateToMass(d, 0.5, names);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_TRUE(t.Contains(1));
  EXPECT_TRUE(t.Contains(0));
  t = TruncateToMass(d, 0.3, names);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.Contains(1));
}

TEST(TruncateTest, RandomizedProperties) {
  std::mt19937_64 rng(7);
  auto names = RelationNames(40);
  std::uniform_real_distribution<double> thresholds(0.05, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    RelationDistribution d = testing::RandomDistribution(rng, 40, 25);
    double threshold = thresholds(rng);
    RelationDistribution t = TruncateToMass(d, threshold, names);
    // Reaches the threshold, and dropping the smallest kept entry would not.
    EXPECT_GE(t.Mass(), threshold - kMassEpsilon);
    double smallest = 1.0;
    for (const auto &e : t.entries()) {
      EXPECT_DOUBLE_EQ(e.proportion, d.Get(e.relation));
      smallest = std::min(smallest, e.proportion);
    }
    EXPECT_LT(t.Mass() - smallest, threshold - kMassEpsilon);
    // Every dropped relation is no larger than every kept one.
    for (const auto &e : d.entries()) {
      if (!t.Contains(e.relation)) {
        EXPECT_LE(e.proportion, smallest);
      }
    }
    // Monotone in the threshold.
    RelationDistribution wider = TruncateToMass(d, std::min(1.0, threshold + 0.05), names);
    for (const auto &e : t.entries()) EXPECT_TRUE(wider.Contains(e.relation));
  }
}

TEST(RelationDistributionTest, FromEntriesSortsAndDropsNonPositive) {
  RelationDistribution d = RelationDistribution::FromEntries(
      {{3, 0.2}, {1, 0.8}, {2, 0.0}, {5, -1.0}}, true);
  EXPECT_EQ(d.entries(), (std::vector<RelationEntry>{{1, 0.8}, {3, 0.2}}));
  EXPECT_TRUE(d.truncated());
  EXPECT_DOUBLE_EQ(d.Mass(), 1.0);
}

TEST(VocabularyTest, InterningRoundTrip) {
  Vocabulary vocab({"person", "politician", "writer"}, {"hasAge", "hasName"});
  for (int i = 0; i < vocab.num_classes(); ++i) {
    EXPECT_EQ(vocab.FindClass(vocab.class_name(i)), i);
  }
  for (int i = 0; i < vocab.num_relations(); ++i) {
    EXPECT_EQ(vocab.FindRelation(vocab.relation_name(i)), i);
  }
  EXPECT_FALSE(vocab.FindClass("democrat").has_value());
}

TEST(VocabularyTest, RejectsBadInput) {
  EXPECT_DWC_ERROR(Vocabulary({"a", "a"}, {"r"}), ErrorCode::kSchema);
  EXPECT_DWC_ERROR(Vocabulary({"a"}, {}), ErrorCode::kSchema);
  EXPECT_DWC_ERROR(Vocabulary({""}, {"r"}), ErrorCode::kSchema);
}

TEST(IdentifierTest, Validity) {
  EXPECT_TRUE(IsValidIdentifier("barackObama"));
  EXPECT_TRUE(IsValidIdentifier("has birth date"));
  EXPECT_FALSE(IsValidIdentifier(""));
  EXPECT_FALSE(IsValidIdentifier("tab\there"));
}

TEST(ClassSignatureTest, SortedAndDeduplicated) {
  ClassSignature s = ClassSignature::FromIndices({3, 1, 3, 2});
  EXPECT_EQ(s.classes(), (std::vector<int>{1, 2, 3}));
  EXPECT_DWC_ERROR(ClassSignature::FromIndices({}), ErrorCode::kSchema);
  EXPECT_DWC_ERROR(ClassSignature::FromIndices({-1}), ErrorCode::kSchema);
}

TEST(ClassSignatureTest, FromNamesDropsUnknown) {
  Vocabulary vocab({"democrat", "person", "politician", "writer"}, {"hasName"});
  int dropped = 0;
  auto s = ClassSignature::FromNames({"writer", "person", "alien", "person"}, vocab,
                                     &dropped);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->classes(), (std::vector<int>{1, 3}));
  EXPECT_EQ(dropped, 1);
  EXPECT_EQ(s->CanonicalString(vocab), "person|writer");
  EXPECT_FALSE(ClassSignature::FromNames({"alien"}, vocab).has_value());
}

TEST(ClassSignatureTest, CanonicalStringIgnoresVocabularyOrder) {
  Vocabulary a({"x", "y", "z"}, {"r"});
  Vocabulary b({"z", "y", "x"}, {"r"});
  auto sa = ClassSignature::FromNames({"z", "x"}, a);
  auto sb = ClassSignature::FromNames({"x", "z"}, b);
  EXPECT_EQ(sa->CanonicalString(a), sb->CanonicalString(b));
}

TEST(ErrorTest, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kIo), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kConfig), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kEmptyDataset), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kFormat), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kDivergence), 4);
}

}  // namespace
}  // namespace dwc
