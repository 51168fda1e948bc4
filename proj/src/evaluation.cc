#include "dwc/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace dwc {

JaccardParts WeightedJaccard(const RelationDistribution &predicted,
                             const RelationDistribution &observed) {
  const auto &p = predicted.entries();
  const auto &o = observed.entries();
  double shared = 0.0, only_observed = 0.0, only_predicted = 0.0;
  size_t i = 0, j = 0;
  while (i < p.size() || j < o.size()) {
    if (j == o.size() || (i < p.size() && p[i].relation < o[j].relation)) {
      only_predicted += 0.5 * p[i].proportion;
      ++i;
    } else if (i == p.size() || o[j].relation < p[i].relation) {
      only_observed += 0.5 * o[j].proportion;
      ++j;
    } else {
      shared += 0.5 * (p[i].proportion + o[j].proportion);
      ++i;
      ++j;
    }
  }
  const double uni = shared + only_observed + only_predicted;
  if (!(uni > 0.0)) {
    throw Error(ErrorCode::kMetric,
                "weighted Jaccard undefined: both distributions are empty");
  }
  return {shared / uni, only_observed / uni, only_predicted / uni};
}

double IntersectionMetric(const RelationDistribution &predicted,
                          const RelationDistribution &observed) {
  const auto &p = predicted.entries();
  const auto &o = observed.entries();
  double sum = 0.0;
  size_t i = 0, j = 0;
  while (i < p.size() && j < o.size()) {
    if (p[i].relation < o[j].relation) {
      ++i;
    } else if (o[j].relation < p[i].relation) {
      ++j;
    } else {
      sum += std::min(p[i].proportion, o[j].proportion);
      ++i;
      ++j;
    }
  }
  return sum;
}

void EvalConfig::Validate() const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "threshold must be in (0, 1]");
  }
}

namespace {

struct Accumulator {
  double jaccard = 0.0, false_neg = 0.0, false_pos = 0.0, intersection = 0.0;
  double weight = 0.0;
  int64_t rows = 0, flagged = 0;

  void Add(const JaccardParts &parts, double inter, double w, bool flag) {
    jaccard += w * parts.jaccard;
    false_neg += w * parts.false_neg;
    false_pos += w * parts.false_pos;
    intersection += w * inter;
    weight += w;
    ++rows;
    flagged += flag;
  }

  MetricReport Finish() const {
    MetricReport r;
    r.n_rows = rows;
    r.degenerate_count = flagged;
    if (weight > 0.0) {
      r.jaccard = jaccard / weight;
      r.false_neg = false_neg / weight;
      r.false_pos = false_pos / weight;
      r.intersection = intersection / weight;
    }
    return r;
  }
};

}  // namespace

EvaluationResult EvaluateModel(const PredictorModel &model,
                               const SignatureDataset &ds,
                               const EvalConfig &cfg) {
  cfg.Validate();
  const Vocabulary &mv = model.vocabulary();
  const Vocabulary &dv = ds.vocabulary();
  EvaluationResult result;

  std::vector<int> class_map(dv.num_classes(), -1);
  for (int c = 0; c < dv.num_classes(); ++c) {
    if (auto index = mv.FindClass(dv.class_name(c))) {
      class_map[c] = *index;
    } else {
      ++result.dropped_classes;
    }
  }
  // Evaluation relation space: the dataset's relations followed by model
  // relations the dataset never observed.
  std::vector<std::string> names = dv.relations().names();
  std::vector<int> relation_map(mv.num_relations());
  for (int r = 0; r < mv.num_relations(); ++r) {
    if (auto index = dv.FindRelation(mv.relation_name(r))) {
      relation_map[r] = *index;
    } else {
      relation_map[r] = names.size();
      names.push_back(mv.relation_name(r));
    }
  }

  Accumulator macro, usage;
  std::vector<int> classes;
  for (const auto &row : ds.rows()) {
    classes.clear();
    for (int c : row.signature.classes()) {
      if (class_map[c] >= 0) classes.push_back(class_map[c]);
    }
    std::sort(classes.begin(), classes.end());
    Prediction prediction = model.PredictIndices(classes);

    std::vector<RelationEntry> mapped;
    mapped.reserve(prediction.distribution.size());
    for (const auto &e : prediction.distribution.entries()) {
      mapped.push_back({relation_map[e.relation], e.proportion});
    }
    RelationDistribution predicted =
        RelationDistribution::FromEntries(std::move(mapped), false);
    const RelationDistribution &observed = row.observed;

    RelationDistribution predicted_set =
        cfg.truncate_predicted ? TruncateToMass(predicted, cfg.threshold, names)
                               : predicted;
    RelationDistribution observed_set =
        cfg.truncate_observed ? TruncateToMass(observed, cfg.threshold, names)
                              : observed;
    JaccardParts parts = WeightedJaccard(predicted_set, observed_set);
    double inter = cfg.truncate_for_intersection
                       ? IntersectionMetric(predicted_set, observed_set)
                       : IntersectionMetric(predicted, observed);
    macro.Add(parts, inter, 1.0, prediction.flagged());
    usage.Add(parts, inter, static_cast<double>(row.usage_total),
              prediction.flagged());
  }
  result.unweighted = macro.Finish();
  result.weighted = usage.Finish();
  return result;
}

namespace {

void AddScaled(MetricReport *into, const MetricReport &r, double scale) {
  into->jaccard += scale * r.jaccard;
  into->false_neg += scale * r.false_neg;
  into->false_pos += scale * r.false_pos;
  into->intersection += scale * r.intersection;
  into->n_rows += r.n_rows;
  into->degenerate_count += r.degenerate_count;
}

}  // namespace

CvReport CrossValidate(const SignatureDataset &ds, ModelKind kind,
                       const TrainConfig &train_cfg, const EvalConfig &eval_cfg,
                       int k, uint64_t seed, int jobs) {
  train_cfg.Validate();
  eval_cfg.Validate();
  FoldAssignment folds = AssignFolds(ds, k, seed);
  CvReport report;
  report.folds.resize(k);
  report.fold_sizes.resize(k);

  std::vector<std::exception_ptr> errors(k);
  auto run_fold = [&](int fold) {
    try {
      std::vector<size_t> test_rows = folds.RowsInFold(fold);
      report.fold_sizes[fold] = test_rows.size();
      if (test_rows.empty()) return;
      std::vector<size_t> train_rows = folds.RowsNotInFold(fold);
      if (train_rows.empty()) return;
      SignatureDataset train = ds.Subset(train_rows);
      SignatureDataset test = ds.Subset(test_rows);
      std::unique_ptr<PredictorModel> model = FitModel(kind, train, train_cfg);
      report.folds[fold] = EvaluateModel(*model, test, eval_cfg);
    } catch (const Error &e) {
      errors[fold] = std::make_exception_ptr(
          Error(e.code(), "fold " + std::to_string(fold) + ": " + e.what()));
    } catch (...) {
      errors[fold] = std::current_exception();
    }
  };

  if (jobs <= 1) {
    for (int fold = 0; fold < k; ++fold) run_fold(fold);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < std::min(jobs, k); ++t) {
      workers.emplace_back([&] {
        for (int fold = next++; fold < k; fold = next++) run_fold(fold);
      });
    }
    for (auto &w : workers) w.join();
  }
  for (auto &error : errors) {
    if (error) std::rethrow_exception(error);
  }

  int used = 0;
  for (int fold = 0; fold < k; ++fold) used += report.folds[fold].unweighted.n_rows > 0;
  if (used == 0) throw Error(ErrorCode::kConfig, "no fold could be evaluated");
  for (int fold = 0; fold < k; ++fold) {
    const EvaluationResult &r = report.folds[fold];
    if (r.unweighted.n_rows == 0) continue;
    AddScaled(&report.mean.unweighted, r.unweighted, 1.0 / used);
    AddScaled(&report.mean.weighted, r.weighted, 1.0 / used);
    report.mean.dropped_classes += r.dropped_classes;
  }
  return report;
}

std::vector<TemporalRow> TemporalEval(
    const PredictorModel &model,
    const std::vector<std::pair<std::string, SignatureDataset>> &future,
    const EvalConfig &eval_cfg) {
  std::vector<TemporalRow> rows;
  for (const auto &[label, ds] : future) {
    bool overlap = false;
    for (const auto &name : ds.vocabulary().relations().names()) {
      if (model.vocabulary().FindRelation(name)) {
        overlap = true;
        break;
      }
    }
    if (!overlap) {
      throw Error(ErrorCode::kConfig, "future dataset '" + label +
                                          "' shares no relation with the model");
    }
    rows.push_back({label, EvaluateModel(model, ds, eval_cfg)});
  }
  return rows;
}

std::vector<TemporalRow> TemporalEval(
    const SignatureDataset &train,
    const std::vector<std::pair<std::string, SignatureDataset>> &future,
    ModelKind kind, const TrainConfig &train_cfg, const EvalConfig &eval_cfg) {
  std::unique_ptr<PredictorModel> model = FitModel(kind, train, train_cfg);
  return TemporalEval(*model, future, eval_cfg);
}

std::string ReportTsvHeader() {
  return "model\tdataset\tjaccard\tfalse_neg\tfalse_pos\tintersection\tn_rows\t"
         "degenerate\tw_jaccard\tw_false_neg\tw_false_pos\tw_intersection\n";
}

std::string ReportTsvRow(const std::string &model, const std::string &dataset,
                         const EvaluationResult &result) {
  const MetricReport &u = result.unweighted;
  const MetricReport &w = result.weighted;
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer),
                "%s\t%s\t%.6f\t%.6f\t%.6f\t%.6f\t%lld\t%lld\t%.6f\t%.6f\t%.6f\t%.6f\n",
                model.c_str(), dataset.c_str(), u.jaccard, u.false_neg,
                u.false_pos, u.intersection, static_cast<long long>(u.n_rows),
                static_cast<long long>(u.degenerate_count), w.jaccard,
                w.false_neg, w.false_pos, w.intersection);
  return buffer;
}

nlohmann::ordered_json ReportJson(const std::string &model,
                                  const std::string &dataset,
                                  const EvaluationResult &result) {
  auto metrics = [](const MetricReport &r) {
    nlohmann::ordered_json j;
    j["jaccard"] = r.jaccard;
    j["false_neg"] = r.false_neg;
    j["false_pos"] = r.false_pos;
    j["intersection"] = r.intersection;
    j["n_rows"] = r.n_rows;
    j["degenerate_count"] = r.degenerate_count;
    return j;
  };
  nlohmann::ordered_json j;
  j["model"] = model;
  j["dataset"] = dataset;
  j["unweighted"] = metrics(result.unweighted);
  j["weighted"] = metrics(result.weighted);
  j["dropped_classes"] = result.dropped_classes;
  return j;
}

}  // namespace dwc
