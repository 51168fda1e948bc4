#ifndef DWC_EVALUATION_H_
#define DWC_EVALUATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dwc/aggregation.h"
#include "dwc/core.h"
#include "dwc/models.h"
#include "json.hpp"

namespace dwc {

// Weighted Jaccard split of the union mass: the three parts sum to one.
struct JaccardParts {
  double jaccard = 0.0;
  double false_neg = 0.0;  // observed but not predicted
  double false_pos = 0.0;  // predicted but not observed
};

// Each relation is weighted by the mean of its predicted and observed
// proportions (absent = 0). The score is the weight of the shared support
// over the weight of the union support. Throws kMetric if both are empty.
JaccardParts WeightedJaccard(const RelationDistribution &predicted,
                             const RelationDistribution &observed);

// Sum over relations of min(predicted, observed).
double IntersectionMetric(const RelationDistribution &predicted,
                          const RelationDistribution &observed);

struct EvalConfig {
  bool truncate_predicted = true;
  bool truncate_observed = true;
  double threshold = 0.95;
  bool weight_by_usage = false;
  // The intersection metric compares the untruncated distributions unless set.
  bool truncate_for_intersection = false;

  void Validate() const;
};

struct MetricReport {
  double jaccard = 0.0;
  double false_neg = 0.0;
  double false_pos = 0.0;
  double intersection = 0.0;
  int64_t n_rows = 0;
  int64_t degenerate_count = 0;  // fallback, degenerate or out-of-vocabulary
};

struct EvaluationResult {
  MetricReport unweighted;  // mean over signatures
  MetricReport weighted;    // mean weighted by signature usage
  int64_t dropped_classes = 0;  // dataset classes unknown to the model

  const MetricReport &Select(bool weight_by_usage) const {
    return weight_by_usage ? weighted : unweighted;
  }
};

// Scores |model| against every row of |ds|. The dataset may use a different
// vocabulary from the model; classes are matched by name and unknown ones
// dropped. Relations predicted but absent from the dataset count as false
// positives.
EvaluationResult EvaluateModel(const PredictorModel &model,
                               const SignatureDataset &ds,
                               const EvalConfig &cfg);

struct CvReport {
  EvaluationResult mean;                // mean over non-empty folds
  std::vector<EvaluationResult> folds;  // indexed by fold; empty folds zeroed
  std::vector<int> fold_sizes;
};

// Grouped k-fold cross-validation. Each fold trains on the other folds' rows
// (with a vocabulary rebuilt from them) and scores the held-out signatures.
// |jobs| > 1 trains folds concurrently; results do not depend on it.
CvReport CrossValidate(const SignatureDataset &ds, ModelKind kind,
                       const TrainConfig &train_cfg, const EvalConfig &eval_cfg,
                       int k, uint64_t seed, int jobs = 1);

struct TemporalRow {
  std::string label;
  EvaluationResult result;
};

// Trains one model on all of |train| and scores it on each future dataset in
// order. Throws kConfig if a future dataset shares no relation with |train|.
std::vector<TemporalRow> TemporalEval(
    const SignatureDataset &train,
    const std::vector<std::pair<std::string, SignatureDataset>> &future,
    ModelKind kind, const TrainConfig &train_cfg, const EvalConfig &eval_cfg);

// Same, with an already trained model.
std::vector<TemporalRow> TemporalEval(
    const PredictorModel &model,
    const std::vector<std::pair<std::string, SignatureDataset>> &future,
    const EvalConfig &eval_cfg);

// Tab-separated report layout:
// model dataset jaccard false_neg false_pos intersection n_rows degenerate
// w_jaccard w_false_neg w_false_pos w_intersection
std::string ReportTsvHeader();
std::string ReportTsvRow(const std::string &model, const std::string &dataset,
                         const EvaluationResult &result);
nlohmann::ordered_json ReportJson(const std::string &model,
                                  const std::string &dataset,
                                  const EvaluationResult &result);

}  // namespace dwc

#endif  // DWC_EVALUATION_H_
