#include <algorithm>
#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "dwc/models.h"

namespace dwc {

RegressionModel::RegressionModel(Vocabulary vocab, Eigen::MatrixXd weights,
                                 double l2)
    : PredictorModel(std::move(vocab)), weights_(std::move(weights)), l2_(l2) {
  if (weights_.rows() != vocabulary().num_classes() ||
      weights_.cols() != vocabulary().num_relations()) {
    throw Error(ErrorCode::kSchema, "regression weights do not match vocabulary");
  }
  if (!weights_.allFinite()) {
    throw Error(ErrorCode::kSchema, "regression weights must be finite");
  }
}

Eigen::VectorXd RegressionModel::RawOutput(std::span<const int> classes) const {
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(weights_.cols());
  for (int c : classes) {
    if (c >= 0 && c < weights_.rows()) raw += weights_.row(c).transpose();
  }
  return raw;
}

Prediction RegressionModel::FromRawOutput(const Eigen::VectorXd &raw) {
  Prediction prediction;
  std::vector<double> clipped(raw.size());
  bool any_positive = false;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    clipped[i] = raw[i] > 0.0 ? raw[i] : 0.0;
    any_positive |= clipped[i] > 0.0;
  }
  if (!any_positive) {
    std::fill(clipped.begin(), clipped.end(), 1.0);
    prediction.degenerate = true;
  }
  prediction.distribution = NormalizeDense(clipped);
  return prediction;
}

Prediction RegressionModel::PredictIndices(std::span<const int> classes) const {
  Prediction prediction = FromRawOutput(RawOutput(classes));
  prediction.out_of_vocabulary = classes.empty();
  return prediction;
}

std::unique_ptr<RegressionModel> FitRegression(const SignatureDataset &ds,
                                               const TrainConfig &cfg,
                                               RegressionFitSummary *summary) {
  if (ds.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty dataset");
  const int n = ds.vocabulary().num_classes();
  const int m = ds.vocabulary().num_relations();

  // Regularized normal equations (X'X + l2 I) W = X'Y with sparse X'X.
  std::vector<Eigen::Triplet<double>> triplets;
  for (int c = 0; c < n; ++c) triplets.emplace_back(c, c, cfg.l2);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(n, m);
  for (const auto &row : ds.rows()) {
    const auto &classes = row.signature.classes();
    for (int a : classes) {
      for (int b : classes) triplets.emplace_back(a, b, 1.0);
      for (const auto &e : row.observed.entries()) xty(a, e.relation) += e.proportion;
    }
  }
  Eigen::SparseMatrix<double> gram(n, n);
  gram.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::MatrixXd weights;
  bool fallback = false;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gram);
  if (ldlt.info() == Eigen::Success) {
    const Eigen::VectorXd d = ldlt.vectorD();
    double max_pivot = d.cwiseAbs().maxCoeff();
    fallback = !(d.minCoeff() > 1e-12 * std::max(max_pivot, 1.0));
  } else {
    fallback = true;
  }
  if (!fallback) {
    weights = ldlt.solve(xty);
    fallback = ldlt.info() != Eigen::Success || !weights.allFinite();
  }
  if (fallback) {
    // Minimal-norm least squares on the dense design.
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(ds.size(), n);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(ds.size(), m);
    for (size_t r = 0; r < ds.size(); ++r) {
      const auto &row = ds.rows()[r];
      for (int c : row.signature.classes()) x(r, c) = 1.0;
      for (const auto &e : row.observed.entries()) y(r, e.relation) = e.proportion;
    }
    if (cfg.l2 > 0.0) {
      Eigen::MatrixXd ridge = std::sqrt(cfg.l2) * Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd xa(ds.size() + n, n), ya(ds.size() + n, m);
      xa << x, ridge;
      ya << y, Eigen::MatrixXd::Zero(n, m);
      x = std::move(xa);
      y = std::move(ya);
    }
    weights = x.completeOrthogonalDecomposition().solve(y);
  }

  auto model =
      std::make_unique<RegressionModel>(ds.vocabulary(), std::move(weights), cfg.l2);
  if (summary != nullptr) {
    summary->min_norm_fallback = fallback;
    double worst = 0.0;
    for (const auto &row : ds.rows()) {
      Eigen::VectorXd residual = model->RawOutput(row.signature.classes());
      for (const auto &e : row.observed.entries()) residual[e.relation] -= e.proportion;
      worst = std::max(worst, residual.cwiseAbs().maxCoeff());
    }
    summary->max_abs_residual = worst;
  }
  return model;
}

}  // namespace dwc
