#include "dwc/completeness.h"

#include <gtest/gtest.h>

#include <random>

#include "dwc/aggregation.h"
#include "test_util.h"

namespace dwc {
namespace {

using Row = SignatureDataset::NamedRow;

std::unique_ptr<PredictorModel> Model(const std::vector<Row> &rows) {
  return FitFrequency(SignatureDataset::FromNamedRows(rows));
}

TEST(ScoreEntityTest, WorkedExample) {
  auto model = Model({{{"person"}, {{"name", 5}, {"age", 3}, {"height", 2}}}});
  KbSnapshot kb;
  kb.entities["bob"] = {{"person"}, {"name", "height"}};
  EntityCompleteness ec = ScoreEntity(*model, kb, "bob", 0.95);
  EXPECT_NEAR(ec.score, 0.7, 1e-15);
  EXPECT_NEAR(ec.predicted_mass, 1.0, 1e-15);
  ASSERT_EQ(ec.missing.size(), 1u);
  EXPECT_EQ(ec.missing[0].relation, "age");
  EXPECT_NEAR(ec.missing[0].proportion, 0.3, 1e-15);
  EXPECT_FALSE(ec.flagged);
}

TEST(ScoreEntityTest, CompleteEntityScoresTruncatedMass) {
  auto model = Model({{{"person"}, {{"name", 6}, {"age", 3}, {"height", 1}}}});
  KbSnapshot kb;
  kb.entities["all"] = {{"person"}, {"name", "age", "height"}};
  EXPECT_NEAR(ScoreEntity(*model, kb, "all", 1.0).score, 1.0, 1e-15);
  EntityCompleteness partial = ScoreEntity(*model, kb, "all", 0.85);
  EXPECT_NEAR(partial.score, 0.9, 1e-15);
  EXPECT_NEAR(partial.predicted_mass, 0.9, 1e-15);
  EXPECT_TRUE(partial.missing.empty());
}

TEST(ScoreEntityTest, EntityWithoutFacts) {
  auto model = Model({{{"person"}, {{"name", 6}, {"age", 3}, {"height", 1}}}});
  KbSnapshot kb;
  kb.entities["empty"] = {{"person"}, {}};
  EntityCompleteness ec = ScoreEntity(*model, kb, "empty", 0.95);
  EXPECT_EQ(ec.score, 0.0);
  ASSERT_EQ(ec.missing.size(), 3u);
  EXPECT_EQ(ec.missing[0].relation, "name");
  EXPECT_EQ(ec.missing[2].relation, "height");
}

TEST(ScoreEntityTest, UnknownEntity) {
  auto model = Model({{{"person"}, {{"name", 1}}}});
  EXPECT_DWC_ERROR(ScoreEntity(*model, KbSnapshot{}, "nobody", 0.95), ErrorCode::kUnknownEntity);
}

TEST(ScoreEntityTest, UnknownClassesAreFlagged) {
  auto model = Model({{{"person"}, {{"name", 1}}}});
  KbSnapshot kb;
  kb.entities["rock"] = {{"mineral"}, {}};
  EXPECT_TRUE(ScoreEntity(*model, kb, "rock", 0.95).flagged);
}

class SubsetTest : public ::testing::Test {
 protected:
  SubsetTest() : model_(Model({{{"X"}, {{"r1", 2}, {"r2", 2}, {"r3", 1}}}})) {
    kb_.entities["e1"] = {{"X"}, {"r1"}};
    kb_.entities["e2"] = {{"X"}, {"r1", "r2"}};
    options_.threshold = 1.0;
  }
  std::unique_ptr<PredictorModel> model_;
  KbSnapshot kb_;
  SubsetOptions options_;
};

TEST_F(SubsetTest, UsageWeightedMean) {
  double score = SubsetCompleteness(*model_, kb_, {"e1", "e2"}, {{"e1", 30}, {"e2", 10}}, options_);
  EXPECT_NEAR(score, 0.5, 1e-15);
}

TEST_F(SubsetTest, UniformUsageIsArithmeticMean) {
  EXPECT_NEAR(SubsetCompleteness(*model_, kb_, {"e1", "e2"}, {{"e1", 4}, {"e2", 4}}, options_),
              0.6, 1e-15);
}

TEST_F(SubsetTest, SingleEntity) {
  EXPECT_NEAR(SubsetCompleteness(*model_, kb_, {"e2"}, {{"e2", 1}}, options_), 0.8, 1e-15);
}

TEST_F(SubsetTest, ZeroWeightsAreConfigError) {
  EXPECT_DWC_ERROR(SubsetCompleteness(*model_, kb_, {"e1", "e2"}, {}, options_),
                   ErrorCode::kConfig);
  EXPECT_DWC_ERROR(SubsetCompleteness(*model_, kb_, {}, {{"e1", 1}}, options_),
                   ErrorCode::kConfig);
}

TEST_F(SubsetTest, ZeroUsageWeightOption) {
  options_.zero_usage_weight = 1.0;
  EXPECT_NEAR(SubsetCompleteness(*model_, kb_, {"e1", "e2"}, {{"e2", 3}}, options_),
              (0.4 + 3 * 0.8) / 4, 1e-15);
}

TEST(GapReportTest, SingleMissingRelation) {
  auto model = Model({{{"person"}, {{"name", 5}, {"age", 3}, {"height", 2}}}});
  KbSnapshot kb;
  kb.entities["bob"] = {{"person"}, {"name", "height"}};
  auto gaps = GapReport(*model, kb, {"bob"}, {{"bob", 1}}, SubsetOptions{}, 10);
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_EQ(gaps[0].relation, "age");
  EXPECT_NEAR(gaps[0].mass, 0.3, 1e-15);
  EXPECT_TRUE(GapReport(*model, kb, {"bob"}, {{"bob", 1}}, SubsetOptions{}, 0).empty());
}

TEST(GapReportTest, AccumulatesAcrossEntities) {
  auto model = Model({{{"P"}, {{"hasBirthdate", 2}, {"hasName", 8}}},
                      {{"Q"}, {{"hasBirthdate", 4}, {"hasName", 6}}}});
  KbSnapshot kb;
  kb.entities["p"] = {{"P"}, {"hasName"}};
  kb.entities["q"] = {{"Q"}, {"hasName"}};
  SubsetOptions options;
  options.threshold = 1.0;
  auto gaps = GapReport(*model, kb, {"p", "q"}, {{"p", 1}, {"q", 1}}, options, 5);
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_EQ(gaps[0].relation, "hasBirthdate");
  EXPECT_NEAR(gaps[0].mass, 0.6, 1e-15);
  EXPECT_NEAR(gaps[0].projected_delta, 0.3, 1e-15);
}

TEST(CompletenessPropertyTest, FillingGapsReachesMaximum) {
  std::mt19937_64 rng(17);
  std::vector<Row> rows;
  for (int i = 0; i < 30; ++i) {
    Row row{{"c" + std::to_string(rng() % 8)}, {}};
    for (int r = 0; r < 10; ++r) {
      if (rng() % 3) row.counts["r" + std::to_string(r)] = 1 + rng() % 9;
    }
    if (row.counts.empty()) row.counts["r0"] = 1;
    rows.push_back(row);
  }
  auto model = Model(rows);
  KbSnapshot kb;
  std::map<EntityId, int64_t> usage;
  std::vector<EntityId> ids;
  for (int e = 0; e < 50; ++e) {
    KbEntity info;
    info.classes = {"c" + std::to_string(rng() % 8), "c" + std::to_string(rng() % 8)};
    for (int r = 0; r < 10; ++r) {
      if (rng() % 2) info.relations.insert("r" + std::to_string(r));
    }
    std::string id = "e" + std::to_string(e);
    kb.entities[id] = info;
    ids.push_back(id);
    usage[id] = 1 + rng() % 100;
  }
  SubsetOptions options;
  CompletenessReport before = AssessCompleteness(*model, kb, ids, usage, options);
  // Adding one missing fact raises that entity's score by its proportion.
  for (const auto &ec : before.per_entity) {
    if (ec.missing.empty()) continue;
    KbSnapshot patched = kb;
    patched.entities[ec.entity].relations.insert(ec.missing[0].relation);
    EXPECT_NEAR(ScoreEntity(*model, patched, ec.entity, 0.95).score,
                ec.score + ec.missing[0].proportion, 1e-12);
  }
  for (const auto &ec : before.per_entity) {
    double missing = 0.0;
    for (const auto &m : ec.missing) missing += m.proportion;
    EXPECT_NEAR(ec.score + missing, ec.predicted_mass, 1e-9);
    EXPECT_GE(ec.score, 0.0);
    EXPECT_LE(ec.predicted_mass, 1.0 + 1e-12);
  }
  // Scaling every weight leaves the subset score unchanged.
  std::map<EntityId, int64_t> scaled = usage;
  for (auto &[id, count] : scaled) count *= 7;
  EXPECT_NEAR(SubsetCompleteness(*model, kb, ids, scaled, options), before.subset_score, 1e-12);
  // Gap masses sum to the weighted gap between score and maximum.
  double total_gap = 0.0;
  for (const auto &g : before.gaps) total_gap += g.projected_delta;
  EXPECT_NEAR(before.subset_score + total_gap, before.max_score, 1e-9);
  for (const auto &ec : before.per_entity) {
    for (const auto &m : ec.missing) kb.entities[ec.entity].relations.insert(m.relation);
  }
  CompletenessReport after = AssessCompleteness(*model, kb, ids, usage, options);
  EXPECT_NEAR(after.subset_score, before.max_score, 1e-9);
  EXPECT_TRUE(after.gaps.empty());
}

TEST(CompletenessOutputTest, TsvAndJson) {
  auto model = Model({{{"person"}, {{"name", 5}, {"age", 3}, {"height", 2}}}});
  KbSnapshot kb;
  kb.entities["bob"] = {{"person"}, {"name", "height"}};
  CompletenessReport report = AssessCompleteness(*model, kb, {"bob"}, {{"bob", 2}}, {});
  EXPECT_EQ(EntityTsv(report),
            "entity\tweight\tscore\tpredicted_mass\tmissing\n"
            "bob\t2.000000\t0.700000\t1.000000\tage\n");
  EXPECT_EQ(GapTsv(report, 5),
            "rank\trelation\tmass\tprojected_delta\n1\tage\t0.600000\t0.300000\n");
  auto j = CompletenessJson(report, 5);
  EXPECT_NEAR(j["subset_score"].get<double>(), 0.7, 1e-15);
  EXPECT_EQ(j["entities"][0]["missing"][0][0], "age");
}

}  // namespace
}  // namespace dwc
