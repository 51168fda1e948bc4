#include "dwc/aggregation.h"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "test_util.h"

namespace dwc {
namespace {

using testing::TempDir;

KbSnapshot SmallKb() {
  KbSnapshot kb;
  kb.entities["e1"] = {{"person"}, {"hasName"}};
  kb.entities["e2"] = {{"person"}, {}};
  kb.entities["e3"] = {{"person", "writer"}, {}};
  return kb;
}

TEST(AggregateTest, GroupsEntitiesBySignature) {
  std::vector<UsageRecord> records = {{"e1", "hasName", 3, std::nullopt},
                                      {"e2", "hasName", 1, std::nullopt},
                                      {"e2", "hasAge", 4, std::nullopt}};
  AggregateResult result = Aggregate(records, SmallKb());
  const SignatureDataset &ds = result.dataset;
  ASSERT_EQ(ds.size(), 1u);
  const SignatureRow &row = ds.rows()[0];
  EXPECT_EQ(ds.ClassNames(row), (std::vector<ClassId>{"person"}));
  EXPECT_EQ(row.usage_total, 8);
  const Vocabulary &v = ds.vocabulary();
  EXPECT_DOUBLE_EQ(row.observed.Get(*v.FindRelation("hasName")), 0.5);
  EXPECT_DOUBLE_EQ(row.observed.Get(*v.FindRelation("hasAge")), 0.5);
  EXPECT_EQ(result.entity_usage.at("e2"), 5);
}

TEST(AggregateTest, SingleRecord) {
  AggregateResult result = Aggregate({{"e3", "r", 1, std::nullopt}}, SmallKb());
  ASSERT_EQ(result.dataset.size(), 1u);
  EXPECT_EQ(result.dataset.rows()[0].usage_total, 1);
  EXPECT_EQ(result.dataset.rows()[0].observed.entries(),
            (std::vector<RelationEntry>{{0, 1.0}}));
  EXPECT_EQ(result.dataset.ClassNames(result.dataset.rows()[0]),
            (std::vector<ClassId>{"person", "writer"}));
}

TEST(AggregateTest, UnknownEntitiesAreSkippedAndCounted) {
  AggregateResult result = Aggregate(
      {{"e1", "hasName", 2, std::nullopt}, {"ghost", "hasName", 5, std::nullopt}},
      SmallKb());
  EXPECT_EQ(result.skipped_records, 1);
  EXPECT_EQ(result.skipped_clauses, 5);
  EXPECT_EQ(result.dataset.rows()[0].usage_total, 2);
}

TEST(AggregateTest, NothingSurvivingIsEmptyDataset) {
  EXPECT_DWC_ERROR(Aggregate({{"ghost", "r", 1, std::nullopt}}, SmallKb()),
                   ErrorCode::kEmptyDataset);
  EXPECT_DWC_ERROR(Aggregate({}, SmallKb()), ErrorCode::kEmptyDataset);
  EXPECT_DWC_ERROR(Aggregate({{"e1", "r", 1, std::nullopt}}, SmallKb(), 2),
                   ErrorCode::kEmptyDataset);
}

TEST(AggregateTest, MinSupportDropsSmallSignatures) {
  AggregateResult result = Aggregate(
      {{"e1", "r", 1, std::nullopt}, {"e3", "r", 5, std::nullopt}}, SmallKb(), 2);
  EXPECT_EQ(result.dataset.size(), 1u);
  EXPECT_EQ(result.dropped_signatures, 1);
}

TEST(AggregateTest, RandomizedConservation) {
  std::mt19937_64 rng(11);
  KbSnapshot kb;
  for (int e = 0; e < 60; ++e) {
    KbEntity info;
    int n = 1 + rng() % 3;
    for (int c = 0; c < n; ++c) info.classes.insert("c" + std::to_string(rng() % 6));
    kb.entities["e" + std::to_string(e)] = info;
  }
  std::vector<UsageRecord> records;
  int64_t total = 0;
  for (int i = 0; i < 2000; ++i) {
    int64_t count = 1 + rng() % 4;
    records.push_back({"e" + std::to_string(rng() % 70),
                       "r" + std::to_string(rng() % 9), count, std::nullopt});
    total += count;
  }
  AggregateResult result = Aggregate(records, kb);
  int64_t kept = 0;
  for (const auto &row : result.dataset.rows()) {
    kept += row.usage_total;
    int64_t row_sum = 0;
    for (const auto &[r, c] : row.counts) row_sum += c;
    EXPECT_EQ(row_sum, row.usage_total);
    EXPECT_NEAR(row.observed.Mass(), 1.0, 1e-12);
  }
  EXPECT_EQ(kept + result.skipped_clauses, total);
  // Signatures are unique.
  std::set<std::vector<int>> seen;
  for (const auto &row : result.dataset.rows()) {
    EXPECT_TRUE(seen.insert(row.signature.classes()).second);
  }
}

TEST(SignatureDatasetTest, FromNamedRowsMergesDuplicates) {
  SignatureDataset ds = SignatureDataset::FromNamedRows(
      {{{"b", "a"}, {{"r1", 2}}}, {{"a", "b"}, {{"r1", 1}, {"r2", 1}}}, {{"c"}, {{"r2", 4}}}});
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.vocabulary().classes().names(), (std::vector<std::string>{"a", "b", "c"}));
  auto named = ds.ToNamed(ds.rows()[0]);
  EXPECT_EQ(named.classes, (std::vector<ClassId>{"a", "b"}));
  EXPECT_EQ(named.counts, (std::map<RelationId, int64_t>{{"r1", 3}, {"r2", 1}}));
}

TEST(SignatureDatasetTest, SubsetRebuildsVocabulary) {
  SignatureDataset ds = SignatureDataset::FromNamedRows(
      {{{"a"}, {{"r1", 2}}}, {{"b"}, {{"r2", 1}}}, {{"c"}, {{"r3", 4}}}});
  SignatureDataset sub = ds.Subset({0, 2});
  EXPECT_EQ(sub.vocabulary().classes().names(), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(sub.vocabulary().relations().names(), (std::vector<std::string>{"r1", "r3"}));
  EXPECT_EQ(sub.rows()[1].usage_total, 4);
}

TEST(FoldTest, DeterministicAndDisjoint) {
  std::vector<SignatureDataset::NamedRow> rows;
  for (int i = 0; i < 300; ++i) {
    rows.push_back({{"c" + std::to_string(i)}, {{"r", 1}}});
  }
  SignatureDataset ds = SignatureDataset::FromNamedRows(rows);
  FoldAssignment a = AssignFolds(ds, 5, 42);
  FoldAssignment b = AssignFolds(ds, 5, 42);
  EXPECT_EQ(a.fold_of, b.fold_of);
  EXPECT_NE(AssignFolds(ds, 5, 43).fold_of, a.fold_of);
  for (int f = 0; f < 5; ++f) {
    auto in = a.RowsInFold(f);
    auto out = a.RowsNotInFold(f);
    EXPECT_EQ(in.size() + out.size(), ds.size());
    std::set<size_t> held(in.begin(), in.end());
    for (size_t r : out) EXPECT_EQ(held.count(r), 0u);
  }
}

TEST(FoldTest, FoldDependsOnlyOnSignatureNames) {
  SignatureDataset full = SignatureDataset::FromNamedRows(
      {{{"x", "y"}, {{"r", 1}}}, {{"a"}, {{"q", 1}}}, {{"z"}, {{"r", 1}}}});
  SignatureDataset sub = full.Subset({0, 2});
  FoldAssignment f1 = AssignFolds(full, 2, 9);
  FoldAssignment f2 = AssignFolds(sub, 2, 9);
  EXPECT_EQ(f1.fold_of[0], f2.fold_of[0]);
  EXPECT_EQ(f1.fold_of[2], f2.fold_of[1]);
}

TEST(FoldTest, TenFoldsOnTwelveThousandSignaturesAreNonEmpty) {
  std::vector<SignatureDataset::NamedRow> rows;
  rows.reserve(12000);
  for (int i = 0; i < 12000; ++i) {
    rows.push_back({{"class" + std::to_string(i % 4400), "group" + std::to_string(i / 4400)},
                    {{"r", 1}}});
  }
  SignatureDataset ds = SignatureDataset::FromNamedRows(rows);
  ASSERT_EQ(ds.size(), 12000u);
  FoldAssignment folds = AssignFolds(ds, 10, 1);
  std::vector<int> sizes(10, 0);
  for (int f : folds.fold_of) ++sizes[f];
  for (int s : sizes) {
    EXPECT_GT(s, 1000);
    EXPECT_LT(s, 1400);
  }
}

TEST(FoldTest, RejectsBadK) {
  SignatureDataset ds = SignatureDataset::FromNamedRows({{{"a"}, {{"r", 1}}}, {{"b"}, {{"r", 1}}}});
  EXPECT_DWC_ERROR(AssignFolds(ds, 1, 0), ErrorCode::kConfig);
  EXPECT_DWC_ERROR(AssignFolds(ds, 3, 0), ErrorCode::kConfig);
}

TEST(StableHashTest, KnownValuesAreStable) {
  EXPECT_EQ(StableHash("person", 1), StableHash("person", 1));
  EXPECT_NE(StableHash("person", 1), StableHash("person", 2));
  EXPECT_NE(StableHash("person|writer", 1), StableHash("person", 1));
}

TEST(ClassMarginalsTest, EntityContributesToEveryClass) {
  KbSnapshot kb = SmallKb();
  auto marginals = ClassMarginals({{"e1", "hasName", 10, std::nullopt},
                                   {"e3", "hasName", 21, std::nullopt},
                                   {"e3", "hasAge", 2, std::nullopt},
                                   {"ghost", "hasName", 99, std::nullopt}},
                                  kb);
  EXPECT_EQ(marginals["person"]["hasName"], 31);
  EXPECT_EQ(marginals["person"]["hasAge"], 2);
  EXPECT_EQ(marginals["writer"]["hasName"], 21);
  EXPECT_TRUE(ClassMarginals({}, kb).empty());
}

TEST(DatasetIoTest, RoundTrip) {
  TempDir dir;
  SignatureDataset ds = SignatureDataset::FromNamedRows(
      {{{"a", "b"}, {{"r1", 2}, {"r2", 5}}}, {{"c"}, {{"r2", 4}}}});
  WriteDataset(dir.File("d.ndjson"), ds);
  SignatureDataset back = LoadDataset(dir.File("d.ndjson"));
  EXPECT_EQ(back.vocabulary(), ds.vocabulary());
  ASSERT_EQ(back.size(), ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.rows()[i].counts, ds.rows()[i].counts);
    EXPECT_EQ(back.rows()[i].observed, ds.rows()[i].observed);
  }
}

TEST(DatasetIoTest, InconsistentTotalIsRejected) {
  TempDir dir;
  testing::WriteText(dir.File("d.ndjson"),
                     R"({"classes":["a"],"total":3,"relations":{"r":2}})" "\n");
  EXPECT_DWC_ERROR(LoadDataset(dir.File("d.ndjson")), ErrorCode::kFormat);
}

}  // namespace
}  // namespace dwc
