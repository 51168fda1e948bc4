#include "dwc/completeness.h"

#include <algorithm>
#include <cstdio>

namespace dwc {

EntityCompleteness ScoreEntity(const PredictorModel &model, const KbSnapshot &kb,
                               const EntityId &entity, double threshold) {
  const KbEntity *info = kb.Find(entity);
  if (info == nullptr) {
    throw Error(ErrorCode::kUnknownEntity, "entity '" + entity + "' is not in the KB");
  }
  const Vocabulary &vocab = model.vocabulary();
  Prediction prediction =
      model.PredictForClasses({info->classes.begin(), info->classes.end()});
  RelationDistribution required = TruncateToMass(
      prediction.distribution, threshold, vocab.relations().names());

  EntityCompleteness result;
  result.entity = entity;
  result.flagged = prediction.flagged();
  for (const auto &e : required.entries()) {
    const std::string &name = vocab.relation_name(e.relation);
    result.predicted_mass += e.proportion;
    if (info->relations.count(name) > 0) {
      result.score += e.proportion;
    } else {
      result.missing.push_back({name, e.proportion});
    }
  }
  std::sort(result.missing.begin(), result.missing.end(),
            [](const MissingRelation &a, const MissingRelation &b) {
              if (a.proportion != b.proportion) return a.proportion > b.proportion;
              return a.relation < b.relation;
            });
  return result;
}

std::map<EntityId, int64_t> EntityUsage(const std::vector<UsageRecord> &records) {
  std::map<EntityId, int64_t> usage;
  for (const auto &r : records) usage[r.entity] += r.count;
  return usage;
}

CompletenessReport AssessCompleteness(const PredictorModel &model,
                                      const KbSnapshot &kb,
                                      const std::vector<EntityId> &entities,
                                      const std::map<EntityId, int64_t> &usage,
                                      const SubsetOptions &options) {
  if (entities.empty()) throw Error(ErrorCode::kConfig, "no entities to assess");
  if (!(options.zero_usage_weight >= 0.0)) {
    throw Error(ErrorCode::kConfig, "zero-usage weight must be non-negative");
  }
  CompletenessReport report;
  std::map<RelationId, double> gap_mass;
  double weighted_score = 0.0, weighted_max = 0.0;
  for (const auto &entity : entities) {
    EntityCompleteness ec = ScoreEntity(model, kb, entity, options.threshold);
    auto it = usage.find(entity);
    double weight = (it != usage.end() && it->second > 0)
                        ? static_cast<double>(it->second)
                        : options.zero_usage_weight;
    report.weights[entity] = weight;
    report.total_weight += weight;
    weighted_score += weight * ec.score;
    weighted_max += weight * ec.predicted_mass;
    if (weight > 0.0) {
      for (const auto &m : ec.missing) gap_mass[m.relation] += weight * m.proportion;
    }
    report.per_entity.push_back(std::move(ec));
  }
  if (!(report.total_weight > 0.0)) {
    throw Error(ErrorCode::kConfig,
                "all entity weights are zero; no entity appears in the usage data");
  }
  report.subset_score = weighted_score / report.total_weight;
  report.max_score = weighted_max / report.total_weight;
  for (const auto &[relation, mass] : gap_mass) {
    report.gaps.push_back({relation, mass, mass / report.total_weight});
  }
  std::sort(report.gaps.begin(), report.gaps.end(),
            [](const GapEntry &a, const GapEntry &b) {
              if (a.mass != b.mass) return a.mass > b.mass;
              return a.relation < b.relation;
            });
  return report;
}

double SubsetCompleteness(const PredictorModel &model, const KbSnapshot &kb,
                          const std::vector<EntityId> &entities,
                          const std::map<EntityId, int64_t> &usage,
                          const SubsetOptions &options) {
  return AssessCompleteness(model, kb, entities, usage, options).subset_score;
}

std::vector<GapEntry> GapReport(const PredictorModel &model, const KbSnapshot &kb,
                                const std::vector<EntityId> &entities,
                                const std::map<EntityId, int64_t> &usage,
                                const SubsetOptions &options, size_t top_k) {
  if (top_k == 0) return {};
  std::vector<GapEntry> gaps =
      AssessCompleteness(model, kb, entities, usage, options).gaps;
  if (gaps.size() > top_k) gaps.resize(top_k);
  return gaps;
}

nlohmann::ordered_json CompletenessJson(const CompletenessReport &report,
                                        size_t top_k) {
  nlohmann::ordered_json j;
  j["subset_score"] = report.subset_score;
  j["max_score"] = report.max_score;
  j["total_weight"] = report.total_weight;
  nlohmann::ordered_json entities = nlohmann::ordered_json::array();
  for (const auto &ec : report.per_entity) {
    nlohmann::ordered_json e;
    e["entity"] = ec.entity;
    e["score"] = ec.score;
    e["predicted_mass"] = ec.predicted_mass;
    e["weight"] = report.weights.at(ec.entity);
    e["flagged"] = ec.flagged;
    nlohmann::ordered_json missing = nlohmann::ordered_json::array();
    for (const auto &m : ec.missing) missing.push_back({m.relation, m.proportion});
    e["missing"] = std::move(missing);
    entities.push_back(std::move(e));
  }
  j["entities"] = std::move(entities);
  nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
  for (size_t i = 0; i < std::min(top_k, report.gaps.size()); ++i) {
    const GapEntry &g = report.gaps[i];
    gaps.push_back({{"relation", g.relation},
                    {"mass", g.mass},
                    {"projected_delta", g.projected_delta}});
  }
  j["gaps"] = std::move(gaps);
  return j;
}

std::string EntityTsv(const CompletenessReport &report) {
  std::string out = "entity\tweight\tscore\tpredicted_mass\tmissing\n";
  char buffer[128];
  for (const auto &ec : report.per_entity) {
    std::snprintf(buffer, sizeof(buffer), "\t%.6f\t%.6f\t%.6f\t",
                  report.weights.at(ec.entity), ec.score, ec.predicted_mass);
    out += ec.entity + buffer;
    for (size_t i = 0; i < ec.missing.size(); ++i) {
      if (i > 0) out += ',';
      out += ec.missing[i].relation;
    }
    out += '\n';
  }
  return out;
}

std::string GapTsv(const CompletenessReport &report, size_t top_k) {
  std::string out = "rank\trelation\tmass\tprojected_delta\n";
  char buffer[128];
  for (size_t i = 0; i < std::min(top_k, report.gaps.size()); ++i) {
    const GapEntry &g = report.gaps[i];
    std::snprintf(buffer, sizeof(buffer), "\t%.6f\t%.6f\n", g.mass, g.projected_delta);
    out += std::to_string(i + 1) + "\t" + g.relation + buffer;
  }
  return out;
}

}  // namespace dwc
