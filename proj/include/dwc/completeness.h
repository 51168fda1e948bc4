#ifndef DWC_COMPLETENESS_H_
#define DWC_COMPLETENESS_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dwc/core.h"
#include "dwc/ingestion.h"
#include "dwc/models.h"
#include "json.hpp"

namespace dwc {

struct MissingRelation {
  RelationId relation;
  double proportion;
};

struct EntityCompleteness {
  EntityId entity;
  double score = 0.0;           // predicted mass the entity already covers
  double predicted_mass = 0.0;  // mass of the truncated prediction
  std::vector<MissingRelation> missing;  // by proportion, descending
  bool flagged = false;  // prediction was a fallback or out-of-vocabulary
};

// Predicts the entity's relation demand from its classes, truncates it to
// |threshold| and sums the proportions of relations the entity has.
// Throws kUnknownEntity if |entity| is not in |kb|.
EntityCompleteness ScoreEntity(const PredictorModel &model, const KbSnapshot &kb,
                               const EntityId &entity, double threshold);

struct SubsetOptions {
  double threshold = 0.95;
  // Weight for entities that never appear in the usage data.
  double zero_usage_weight = 0.0;
};

struct GapEntry {
  RelationId relation;
  double mass = 0.0;              // sum of usage weight x missing proportion
  double projected_delta = 0.0;   // mass / total weight
};

struct CompletenessReport {
  std::vector<EntityCompleteness> per_entity;
  std::map<EntityId, double> weights;
  double total_weight = 0.0;
  double subset_score = 0.0;
  // Best reachable subset score: weighted mean of predicted_mass.
  double max_score = 0.0;
  std::vector<GapEntry> gaps;  // every missing relation, ranked
};

// Scores every entity, then aggregates with usage weights. Throws kConfig if
// |entities| is empty or every weight is zero.
CompletenessReport AssessCompleteness(
    const PredictorModel &model, const KbSnapshot &kb,
    const std::vector<EntityId> &entities,
    const std::map<EntityId, int64_t> &usage, const SubsetOptions &options);

// Usage-weighted mean entity score.
double SubsetCompleteness(const PredictorModel &model, const KbSnapshot &kb,
                          const std::vector<EntityId> &entities,
                          const std::map<EntityId, int64_t> &usage,
                          const SubsetOptions &options = {});

// Missing relations ranked by accumulated usage-weighted demand, at most
// |top_k| of them. Ties are broken by relation name.
std::vector<GapEntry> GapReport(const PredictorModel &model, const KbSnapshot &kb,
                                const std::vector<EntityId> &entities,
                                const std::map<EntityId, int64_t> &usage,
                                const SubsetOptions &options, size_t top_k);

// Clause totals per entity.
std::map<EntityId, int64_t> EntityUsage(const std::vector<UsageRecord> &records);

nlohmann::ordered_json CompletenessJson(const CompletenessReport &report,
                                        size_t top_k);
std::string EntityTsv(const CompletenessReport &report);
std::string GapTsv(const CompletenessReport &report, size_t top_k);

}  // namespace dwc

#endif  // DWC_COMPLETENESS_H_
