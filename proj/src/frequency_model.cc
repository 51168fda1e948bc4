#include <algorithm>
#include <map>

#include "dwc/models.h"

namespace dwc {

const char *ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFrequency: return "freq";
    case ModelKind::kRegression: return "regr";
    case ModelKind::kNeural: return "nn";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string &name) {
  if (name == "freq" || name == "frequency") return ModelKind::kFrequency;
  if (name == "regr" || name == "regression") return ModelKind::kRegression;
  if (name == "nn" || name == "neural") return ModelKind::kNeural;
  throw Error(ErrorCode::kConfig, "unknown model kind '" + name +
                                      "' (expected freq, regr or nn)");
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string &what) {
    throw Error(ErrorCode::kConfig, what);
  };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (hidden < 1) fail("hidden width must be >= 1");
  if (!(l2 >= 0.0)) fail("l2 must be non-negative");
  if (!(threshold > 0.0 && threshold <= 1.0)) fail("threshold must be in (0, 1]");
}

Prediction PredictorModel::PredictForClasses(
    const std::vector<ClassId> &classes) const {
  std::vector<int> indices;
  for (const auto &name : classes) {
    if (auto index = vocab_.FindClass(name)) indices.push_back(*index);
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return PredictIndices(indices);
}

FrequencyModel::FrequencyModel(Vocabulary vocab,
                               std::vector<RelationCounts> class_counts,
                               FrequencyCombine combine, bool fallback)
    : PredictorModel(std::move(vocab)),
      counts_(std::move(class_counts)),
      combine_(combine),
      fallback_(fallback) {
  counts_.resize(vocabulary().num_classes());
  for (const auto &counts : counts_) {
    for (const auto &[relation, count] : counts) {
      if (count < 0) throw Error(ErrorCode::kSchema, "negative class count");
      global_[relation] += count;
    }
  }
}

int64_t FrequencyModel::ParameterCount() const {
  int64_t stored = 0;
  for (const auto &counts : counts_) stored += counts.size();
  return stored;
}

Prediction FrequencyModel::PredictIndices(std::span<const int> classes) const {
  Prediction prediction;
  const int m = vocabulary().num_relations();
  std::vector<double> combined(m, 0.0);
  int known = 0;
  for (int c : classes) {
    if (c < 0 || c >= static_cast<int>(counts_.size())) continue;
    const RelationCounts &counts = counts_[c];
    if (counts.empty()) continue;
    ++known;
    if (combine_ == FrequencyCombine::kSumCounts) {
      for (const auto &[relation, count] : counts) {
        combined[relation] += static_cast<double>(count);
      }
    } else {
      int64_t total = 0;
      for (const auto &[relation, count] : counts) total += count;
      for (const auto &[relation, count] : counts) {
        combined[relation] += static_cast<double>(count) / total;
      }
    }
  }
  if (known == 0) {
    if (!fallback_ || global_.empty()) {
      throw Error(ErrorCode::kUnknownSignature,
                  "no class of the signature is known to the frequency model");
    }
    prediction.distribution = Normalize(global_);
    prediction.fallback = true;
    prediction.out_of_vocabulary = true;
    return prediction;
  }
  prediction.distribution = NormalizeDense(combined);
  return prediction;
}

std::unique_ptr<FrequencyModel> FitFrequency(const SignatureDataset &ds,
                                             const TrainConfig &cfg) {
  if (ds.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty dataset");
  std::vector<RelationCounts> counts(ds.vocabulary().num_classes());
  for (const auto &row : ds.rows()) {
    for (int c : row.signature.classes()) {
      for (const auto &[relation, count] : row.counts) {
        counts[c][relation] += count;
      }
    }
  }
  return std::make_unique<FrequencyModel>(ds.vocabulary(), std::move(counts),
                                          cfg.frequency_combine,
                                          cfg.frequency_fallback);
}

std::unique_ptr<PredictorModel> FitModel(ModelKind kind,
                                         const SignatureDataset &ds,
                                         const TrainConfig &cfg) {
  cfg.Validate();
  switch (kind) {
    case ModelKind::kFrequency: return FitFrequency(ds, cfg);
    case ModelKind::kRegression: return FitRegression(ds, cfg);
    case ModelKind::kNeural: return FitNeural(ds, cfg);
  }
  throw Error(ErrorCode::kConfig, "unknown model kind");
}

}  // namespace dwc
