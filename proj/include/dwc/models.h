#ifndef DWC_MODELS_H_
#define DWC_MODELS_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dwc/aggregation.h"
#include "dwc/core.h"

namespace dwc {

enum class ModelKind { kFrequency, kRegression, kNeural };

const char *ModelKindName(ModelKind kind);  // "freq", "regr", "nn"
// Accepts "freq"/"frequency", "regr"/"regression", "nn"/"neural".
ModelKind ParseModelKind(const std::string &name);

// How the frequency baseline combines the per-class count tables.
enum class FrequencyCombine {
  kSumCounts,       // sum raw counts, then normalize
  kMeanNormalized,  // average the per-class normalized distributions
};

struct TrainConfig {
  uint64_t seed = 1;
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int hidden = 10;
  double l2 = 1e-3;  // ridge coefficient for the regression model
  double threshold = 0.95;
  FrequencyCombine frequency_combine = FrequencyCombine::kSumCounts;
  bool frequency_fallback = true;

  // Throws kConfig on out-of-range values.
  void Validate() const;
};

struct Prediction {
  RelationDistribution distribution;
  bool degenerate = false;         // regression output had no positive mass
  bool fallback = false;           // frequency model used the global marginal
  bool out_of_vocabulary = false;  // no input class was known to the model

  bool flagged() const { return degenerate || fallback || out_of_vocabulary; }
};

// Common interface of the three relation-distribution predictors.
class PredictorModel {
 public:
  explicit PredictorModel(Vocabulary vocab) : vocab_(std::move(vocab)) {}
  virtual ~PredictorModel() = default;

  virtual ModelKind kind() const = 0;
  const Vocabulary &vocabulary() const { return vocab_; }

  // |classes| holds sorted, unique class indices into the vocabulary and may
  // be empty when none of an entity's classes is known.
  virtual Prediction PredictIndices(std::span<const int> classes) const = 0;

  Prediction Predict(const ClassSignature &signature) const {
    return PredictIndices(signature.classes());
  }
  // Unknown class names are dropped.
  Prediction PredictForClasses(const std::vector<ClassId> &classes) const;

  virtual int64_t ParameterCount() const = 0;

 private:
  Vocabulary vocab_;
};

class FrequencyModel : public PredictorModel {
 public:
  FrequencyModel(Vocabulary vocab, std::vector<RelationCounts> class_counts,
                 FrequencyCombine combine, bool fallback);

  ModelKind kind() const override { return ModelKind::kFrequency; }
  Prediction PredictIndices(std::span<const int> classes) const override;
  int64_t ParameterCount() const override;

  // Raw counts per class index; empty for classes without usage.
  const std::vector<RelationCounts> &class_counts() const { return counts_; }
  const RelationCounts &global_counts() const { return global_; }
  FrequencyCombine combine() const { return combine_; }
  bool fallback() const { return fallback_; }

 private:
  std::vector<RelationCounts> counts_;
  RelationCounts global_;
  FrequencyCombine combine_;
  bool fallback_;
};

std::unique_ptr<FrequencyModel> FitFrequency(const SignatureDataset &ds,
                                             const TrainConfig &cfg = {});

struct RegressionFitSummary {
  bool min_norm_fallback = false;  // normal equations were singular
  double max_abs_residual = 0.0;   // over the dense training targets
};

class RegressionModel : public PredictorModel {
 public:
  RegressionModel(Vocabulary vocab, Eigen::MatrixXd weights, double l2);

  ModelKind kind() const override { return ModelKind::kRegression; }
  Prediction PredictIndices(std::span<const int> classes) const override;
  int64_t ParameterCount() const override { return weights_.size(); }

  // Unclipped linear output x * W.
  Eigen::VectorXd RawOutput(std::span<const int> classes) const;
  // Clips negatives and renormalizes; uniform and degenerate if nothing is
  // positive.
  static Prediction FromRawOutput(const Eigen::VectorXd &raw);

  const Eigen::MatrixXd &weights() const { return weights_; }  // n x m
  double l2() const { return l2_; }

 private:
  Eigen::MatrixXd weights_;
  double l2_;
};

std::unique_ptr<RegressionModel> FitRegression(
    const SignatureDataset &ds, const TrainConfig &cfg,
    RegressionFitSummary *summary = nullptr);

// Weights of the one-hidden-layer network, row-major.
struct NeuralParams {
  int inputs = 0;   // n
  int hidden = 0;   // h
  int outputs = 0;  // m
  std::vector<double> w1;  // h x n
  std::vector<double> b1;  // h
  std::vector<double> w2;  // m x h
  std::vector<double> b2;  // m

  NeuralParams() = default;
  NeuralParams(int n, int h, int m);
  int64_t size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  // Flat view in the order w1, b1, w2, b2.
  double &at(int64_t i);
  double at(int64_t i) const;
  void SetZero();
  bool AllFinite() const;
};

// A training example: active input classes and the target distribution.
struct NeuralExample {
  std::vector<int> classes;
  std::vector<RelationEntry> target;
};

// Mean over |batch| of KL(target || softmax output). If |grad| is non-null it
// receives the gradient of that mean (and must be shaped like |params|).
double NeuralLossAndGradient(const NeuralParams &params,
                             std::span<const NeuralExample> batch,
                             NeuralParams *grad);

// Softmax output for the given active classes.
std::vector<double> NeuralForward(const NeuralParams &params,
                                  std::span<const int> classes);

struct NeuralTrainSummary {
  std::vector<double> loss_history;  // full-data loss before and after epochs
  double initial_loss() const { return loss_history.front(); }
  double final_loss() const { return loss_history.back(); }
};

class NeuralModel : public PredictorModel {
 public:
  NeuralModel(Vocabulary vocab, NeuralParams params);

  ModelKind kind() const override { return ModelKind::kNeural; }
  Prediction PredictIndices(std::span<const int> classes) const override;
  int64_t ParameterCount() const override { return params_.size(); }

  const NeuralParams &params() const { return params_; }

 private:
  NeuralParams params_;
};

// Seeded mini-batch Adam on the KL objective. Throws kDivergence if the loss
// becomes non-finite.
std::unique_ptr<NeuralModel> FitNeural(const SignatureDataset &ds,
                                       const TrainConfig &cfg,
                                       NeuralTrainSummary *summary = nullptr);

std::vector<NeuralExample> MakeNeuralExamples(const SignatureDataset &ds);

// Trains the requested kind of model on the whole dataset.
std::unique_ptr<PredictorModel> FitModel(ModelKind kind,
                                         const SignatureDataset &ds,
                                         const TrainConfig &cfg);

inline constexpr int kModelFormatVersion = 1;

// Model file: {format_version, kind, classes, relations, params}.
std::string SerializeModel(const PredictorModel &model);
std::unique_ptr<PredictorModel> DeserializeModel(const std::string &text);
void SaveModel(const PredictorModel &model, const std::string &path);
std::unique_ptr<PredictorModel> LoadModel(const std::string &path);

}  // namespace dwc

#endif  // DWC_MODELS_H_
