#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dwc/models.h"

namespace dwc {

NeuralParams::NeuralParams(int n, int h, int m)
    : inputs(n),
      hidden(h),
      outputs(m),
      w1(static_cast<size_t>(h) * n, 0.0),
      b1(h, 0.0),
      w2(static_cast<size_t>(m) * h, 0.0),
      b2(m, 0.0) {}

double &NeuralParams::at(int64_t i) {
  if (i < static_cast<int64_t>(w1.size())) return w1[i];
  i -= w1.size();
  if (i < static_cast<int64_t>(b1.size())) return b1[i];
  i -= b1.size();
  if (i < static_cast<int64_t>(w2.size())) return w2[i];
  i -= w2.size();
  return b2.at(i);
}

double NeuralParams::at(int64_t i) const {
  return const_cast<NeuralParams *>(this)->at(i);
}

void NeuralParams::SetZero() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
}

bool NeuralParams::AllFinite() const {
  auto finite = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(w1) && finite(b1) && finite(w2) && finite(b2);
}

namespace {

// Activations of one forward pass.
struct Forward {
  std::vector<double> pre_hidden;  // W1 x + b1
  std::vector<double> hidden;      // relu
  std::vector<double> logits;
  double log_normalizer = 0.0;     // log sum exp(logits)
};

void RunForward(const NeuralParams &p, std::span<const int> classes, Forward *f) {
  const int n = p.inputs, h = p.hidden, m = p.outputs;
  f->pre_hidden.assign(p.b1.begin(), p.b1.end());
  for (int c : classes) {
    if (c < 0 || c >= n) continue;
    for (int j = 0; j < h; ++j) f->pre_hidden[j] += p.w1[static_cast<size_t>(j) * n + c];
  }
  f->hidden.resize(h);
  for (int j = 0; j < h; ++j) f->hidden[j] = std::max(0.0, f->pre_hidden[j]);
  f->logits.assign(p.b2.begin(), p.b2.end());
  for (int i = 0; i < m; ++i) {
    const double *row = &p.w2[static_cast<size_t>(i) * h];
    double z = 0.0;
    for (int j = 0; j < h; ++j) z += row[j] * f->hidden[j];
    f->logits[i] += z;
  }
  double max_logit = *std::max_element(f->logits.begin(), f->logits.end());
  double sum = 0.0;
  for (double z : f->logits) sum += std::exp(z - max_logit);
  f->log_normalizer = max_logit + std::log(sum);
}

}  // namespace

std::vector<double> NeuralForward(const NeuralParams &params,
                                  std::span<const int> classes) {
  Forward f;
  RunForward(params, classes, &f);
  std::vector<double> p(params.outputs);
  for (int i = 0; i < params.outputs; ++i) {
    p[i] = std::exp(f.logits[i] - f.log_normalizer);
  }
  return p;
}

double NeuralLossAndGradient(const NeuralParams &params,
                             std::span<const NeuralExample> batch,
                             NeuralParams *grad) {
  const int n = params.inputs, h = params.hidden, m = params.outputs;
  if (grad != nullptr) grad->SetZero();
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  Forward f;
  std::vector<double> dlogits(m), dhidden(h);
  double loss = 0.0;
  for (const NeuralExample &ex : batch) {
    RunForward(params, ex.classes, &f);
    for (const auto &t : ex.target) {
      double log_p = f.logits[t.relation] - f.log_normalizer;
      loss += t.proportion * (std::log(t.proportion) - log_p);
    }
    if (grad == nullptr) continue;

    // dKL/dlogits = softmax - target, since the target sums to one.
    for (int i = 0; i < m; ++i) {
      dlogits[i] = std::exp(f.logits[i] - f.log_normalizer) * scale;
    }
    for (const auto &t : ex.target) dlogits[t.relation] -= t.proportion * scale;

    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (int i = 0; i < m; ++i) {
      const double d = dlogits[i];
      grad->b2[i] += d;
      double *grow = &grad->w2[static_cast<size_t>(i) * h];
      const double *wrow = &params.w2[static_cast<size_t>(i) * h];
      for (int j = 0; j < h; ++j) {
        grow[j] += d * f.hidden[j];
        dhidden[j] += d * wrow[j];
      }
    }
    for (int j = 0; j < h; ++j) {
      if (f.pre_hidden[j] <= 0.0) continue;
      grad->b1[j] += dhidden[j];
      for (int c : ex.classes) {
        if (c >= 0 && c < n) grad->w1[static_cast<size_t>(j) * n + c] += dhidden[j];
      }
    }
  }
  return loss * scale;
}

NeuralModel::NeuralModel(Vocabulary vocab, NeuralParams params)
    : PredictorModel(std::move(vocab)), params_(std::move(params)) {
  if (params_.inputs != vocabulary().num_classes() ||
      params_.outputs != vocabulary().num_relations() || params_.hidden < 1 ||
      params_.w1.size() != static_cast<size_t>(params_.hidden) * params_.inputs ||
      params_.b1.size() != static_cast<size_t>(params_.hidden) ||
      params_.w2.size() != static_cast<size_t>(params_.outputs) * params_.hidden ||
      params_.b2.size() != static_cast<size_t>(params_.outputs)) {
    throw Error(ErrorCode::kSchema, "neural parameters do not match vocabulary");
  }
  if (!params_.AllFinite()) {
    throw Error(ErrorCode::kSchema, "neural parameters must be finite");
  }
}

Prediction NeuralModel::PredictIndices(std::span<const int> classes) const {
  Prediction prediction;
  std::vector<double> p = NeuralForward(params_, classes);
  std::vector<RelationEntry> entries;
  entries.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    entries.push_back({static_cast<int>(i), p[i]});
  }
  prediction.distribution = RelationDistribution::FromEntries(std::move(entries), false);
  prediction.out_of_vocabulary = classes.empty();
  return prediction;
}

std::vector<NeuralExample> MakeNeuralExamples(const SignatureDataset &ds) {
  std::vector<NeuralExample> examples;
  examples.reserve(ds.size());
  for (const auto &row : ds.rows()) {
    examples.push_back({row.signature.classes(), row.observed.entries()});
  }
  return examples;
}

namespace {

class Adam {
 public:
  Adam(int64_t size, double learning_rate)
      : lr_(learning_rate), m_(size, 0.0), v_(size, 0.0) {}

  void Step(NeuralParams *params, const NeuralParams &grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    int64_t offset = 0;
    auto update = [&](std::vector<double> &w, const std::vector<double> &g) {
      for (size_t i = 0; i < w.size(); ++i) {
        double &mi = m_[offset + i];
        double &vi = v_[offset + i];
        mi = kBeta1 * mi + (1.0 - kBeta1) * g[i];
        vi = kBeta2 * vi + (1.0 - kBeta2) * g[i] * g[i];
        w[i] -= lr_ * (mi / c1) / (std::sqrt(vi / c2) + kEpsilon);
      }
      offset += w.size();
    };
    update(params->w1, grad.w1);
    update(params->b1, grad.b1);
    update(params->w2, grad.w2);
    update(params->b2, grad.b2);
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  double lr_;
  int t_ = 0;
  std::vector<double> m_, v_;
};

// Glorot-uniform weights, zero biases.
void InitializeParams(NeuralParams *p, std::mt19937_64 &rng) {
  auto fill = [&rng](std::vector<double> &w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double &x : w) x = dist(rng);
  };
  fill(p->w1, p->inputs, p->hidden);
  fill(p->w2, p->hidden, p->outputs);
}

}  // namespace

std::unique_ptr<NeuralModel> FitNeural(const SignatureDataset &ds,
                                       const TrainConfig &cfg,
                                       NeuralTrainSummary *summary) {
  cfg.Validate();
  if (ds.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty dataset");
  const int n = ds.vocabulary().num_classes();
  const int m = ds.vocabulary().num_relations();
  std::mt19937_64 rng(cfg.seed);
  NeuralParams params(n, cfg.hidden, m);
  InitializeParams(&params, rng);

  const std::vector<NeuralExample> examples = MakeNeuralExamples(ds);
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<NeuralExample> batch;
  batch.reserve(cfg.batch_size);
  NeuralParams grad(n, cfg.hidden, m);
  Adam adam(params.size(), cfg.learning_rate);

  auto check = [](double loss, int epoch, int batch_index) {
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite training loss at epoch " << epoch << ", batch "
          << batch_index;
      throw Error(ErrorCode::kDivergence, msg.str());
    }
  };

  std::vector<double> history;
  history.push_back(NeuralLossAndGradient(params, examples, nullptr));
  check(history.back(), 0, -1);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int batch_index = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      double loss = NeuralLossAndGradient(params, batch, &grad);
      check(loss, epoch, batch_index);
      adam.Step(&params, grad);
      ++batch_index;
    }
    history.push_back(NeuralLossAndGradient(params, examples, nullptr));
    check(history.back(), epoch, -1);
  }
  if (summary != nullptr) summary->loss_history = std::move(history);
  return std::make_unique<NeuralModel>(ds.vocabulary(), std::move(params));
}

}  // namespace dwc
