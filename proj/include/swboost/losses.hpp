#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "swboost/model.hpp"
#include "swboost/stumps.hpp"

namespace swboost {

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// 1 / (1 + exp(-x)) without overflow.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Max-shifted log(sum(exp(a))) over a matrix of exponents; -inf entries are
/// skipped (they contribute exp(-inf) = 0).
inline double log_sum_exp(const Eigen::MatrixXd& a) {
  const double shift = a.maxCoeff();
  if (!std::isfinite(shift)) {
    // All -inf: empty sum. +inf or NaN: propagate.
    return shift;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double e = a(i, j) - shift;
      if (e > -std::numeric_limits<double>::infinity()) total += std::exp(e);
    }
  }
  return shift + std::log(total);
}

/// Per-(sample,class) margins rho(i,r) = score(i, y_i) - score(i, r) for an
/// m x k score matrix. The true-class column is exactly zero.
using MarginTable = Eigen::MatrixXd;

inline MarginTable margins_from_scores(const Eigen::MatrixXd& scores,
                                       const std::vector<int>& labels) {
  if (scores.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DataError("margins: score rows do not match label count");
  }
  MarginTable rho(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double own = scores(i, labels[static_cast<std::size_t>(i)] - 1);
    rho.row(i) = Eigen::RowVectorXd::Constant(scores.cols(), own) - scores.row(i);
  }
  return rho;
}

inline MarginTable margins(const BoostModel& model, const Dataset& data) {
  if (model.k != data.k) throw DataError("margins: class count mismatch");
  return margins_from_scores(model.scores(data), data.labels);
}

/// Regularized primal value. Exponential uses the log-sum-exp form
/// log(sum_{i,r} exp(-rho_ir)) + nu*|W|_1; logistic uses
/// sum_{i,r} log(1 + exp(-rho_ir)) + nu*|W|_1. Sums run over every class
/// including r = y_i.
inline double primal_objective(const MarginTable& rho, const Eigen::MatrixXd& W,
                               double nu, LossKind kind) {
  if (nu < 0.0) throw DataError("primal_objective: nu must be >= 0");
  if ((W.array() < 0.0).any()) {
    throw DataError("primal_objective: W has negative entries");
  }
  const double reg = nu * W.sum();  // |W|_1 on the nonnegative orthant
  if (kind == LossKind::exponential) {
    return log_sum_exp(-rho) + reg;
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      total += softplus(-rho(i, j));
    }
  }
  return total + reg;
}

/// Dual weights from margins. Exponential: softmax of -rho over all (i,r),
/// summing to one. Logistic: elementwise sigmoid of -rho, each in (0,1).
inline Eigen::MatrixXd dual_update(const MarginTable& rho, LossKind kind) {
  Eigen::MatrixXd u(rho.rows(), rho.cols());
  if (kind == LossKind::exponential) {
    const double shift = (-rho).maxCoeff();
    double z = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        u(i, j) = std::exp(-rho(i, j) - shift);
        z += u(i, j);
      }
    }
    u /= z;
  } else {
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        u(i, j) = sigmoid(-rho(i, j));
      }
    }
  }
  return u;
}

/// Negative-entropy dual value with the 0*log(0) = 0 convention.
/// Exponential requires sum(u) = 1 (within 1e-9); logistic requires entries
/// in [0,1] and adds the (1-u)*log(1-u) term.
inline double dual_objective(const Eigen::MatrixXd& u, LossKind kind) {
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  if (kind == LossKind::exponential) {
    if (std::abs(u.sum() - 1.0) > 1e-9) {
      throw DataError("dual_objective: exponential duals must sum to 1");
    }
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const double x = u(i, j);
      if (x < 0.0 || (kind == LossKind::logistic && x > 1.0)) {
        throw DataError("dual_objective: weight outside valid range");
      }
      total += xlogx(x);
      if (kind == LossKind::logistic) total += xlogx(1.0 - x);
    }
  }
  return total;
}

/// Largest violation, over a stump pool and all classes, of the dual
/// constraint edge(stump, r) <= nu. A value <= 0 certifies dual feasibility
/// over the pool.
inline double dual_infeasibility(const Eigen::MatrixXd& u, const Dataset& data,
                                 std::span<const DecisionStump> pool,
                                 double nu) {
  const EdgeWeights v = edge_weights(u, data.labels);
  double worst = -std::numeric_limits<double>::infinity();
  for (const DecisionStump& stump : pool) {
    for (int r = 1; r <= data.k; ++r) {
      worst = std::max(worst, edge(stump, data, v, r));
    }
  }
  return worst - nu;
}

/// Violation over the full decision-stump family (every feature, every
/// midpoint threshold, both polarities); uses the exact sort-and-scan search.
inline double dual_infeasibility(const Eigen::MatrixXd& u, const Dataset& data,
                                 double nu) {
  const EdgeWeights v = edge_weights(u, data.labels);
  return best_stump(data, v).edge - nu;
}

}  // namespace swboost
