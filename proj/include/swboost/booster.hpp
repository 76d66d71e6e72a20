#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swboost/boxsolver.hpp"
#include "swboost/losses.hpp"
#include "swboost/model.hpp"

namespace swboost {

struct TrainConfig {
  LossKind loss = LossKind::exponential;
  double nu = 1e-9;
  double eta = 0.5;                  // shrinkage in (0,1]
  std::optional<double> kappa;       // elementwise step cap
  int max_rounds = 500;
  double stop_slack = 1e-7;          // epsilon in the stopping rule
  SolverSettings solver;
  std::uint64_t seed = 0;
  // k = 2, exponential only: replace the per-round solve with the classic
  // closed-form coefficient 0.5*log((1-eps)/eps).
  bool binary_closed_form = false;
};

struct RoundRecord {
  int round = 0;
  DecisionStump stump;
  int r_star = 1;
  double edge = 0.0;
  double objective = 0.0;
  double train_error = 0.0;
  std::optional<double> test_error;
  double solve_ms = 0.0;
};

struct TrainTrace {
  std::vector<RoundRecord> rounds;
};

struct TrainResult {
  BoostModel model;
  TrainTrace trace;
};

/// Per-round view handed to an optional observer; references are only valid
/// during the callback.
struct RoundObservation {
  int round;
  const BoostModel& model;
  const Eigen::MatrixXd& duals;    // weights after this round's update
  const MarginTable& margins;      // margins after this round
  double edge;                     // selected edge before the update
};
using RoundCallback = std::function<void(const RoundObservation&)>;

namespace detail {

/// Single-round coefficient objective over the k entries of the new row.
/// The residual weights enter in log space so that saturated margins cannot
/// overflow; entries of -inf contribute nothing.
class StageObjective {
 public:
  StageObjective(LossKind kind, Eigen::MatrixXd log_cache, Eigen::VectorXd h,
                 const std::vector<int>& labels, double nu)
      : kind_(kind),
        log_cache_(std::move(log_cache)),
        h_(std::move(h)),
        labels_(labels),
        nu_(nu) {}

  double operator()(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const {
    const Eigen::Index m = log_cache_.rows();
    const Eigen::Index k = log_cache_.cols();
    Eigen::MatrixXd a(m, k);  // log cache minus this round's margins
    for (Eigen::Index i = 0; i < m; ++i) {
      const double own = w(labels_[static_cast<std::size_t>(i)] - 1);
      for (Eigen::Index r = 0; r < k; ++r) {
        a(i, r) = log_cache_(i, r) - h_(i) * (own - w(r));
      }
    }
    grad = Eigen::VectorXd::Constant(k, nu_);
    double value = nu_ * w.sum();
    if (kind_ == LossKind::exponential) {
      const double shift = a.maxCoeff();
      double z = 0.0;
      Eigen::MatrixXd p(m, k);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index r = 0; r < k; ++r) {
          p(i, r) = std::exp(a(i, r) - shift);
          z += p(i, r);
        }
      }
      value += shift + std::log(z);
      for (Eigen::Index i = 0; i < m; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index r = 0; r < k; ++r) {
          const double pr = p(i, r) / z;
          row_sum += pr;
          grad(r) += h_(i) * pr;
        }
        grad(labels_[static_cast<std::size_t>(i)] - 1) -= h_(i) * row_sum;
      }
    } else {
      for (Eigen::Index i = 0; i < m; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index r = 0; r < k; ++r) {
          value += softplus(a(i, r));
          const double qr = sigmoid(a(i, r));
          row_sum += qr;
          grad(r) += h_(i) * qr;
        }
        grad(labels_[static_cast<std::size_t>(i)] - 1) -= h_(i) * row_sum;
      }
    }
    return value;
  }

 private:
  LossKind kind_;
  Eigen::MatrixXd log_cache_;
  Eigen::VectorXd h_;
  const std::vector<int>& labels_;
  double nu_;
};

inline Eigen::MatrixXd log_of_weights(const Eigen::MatrixXd& u) {
  if (!u.allFinite()) throw DataError("stage objective: non-finite cache");
  if ((u.array() < 0.0).any()) {
    throw DataError("stage objective: cache must be nonnegative");
  }
  return u.array().log().matrix();  // log(0) = -inf is fine downstream
}

}  // namespace detail

/// Eq.-style single-round exponential objective
/// log(sum_{i,r} u_ir * exp(-h_i*(w_{y_i} - w_r))) + nu*|w|_1 and its
/// analytic gradient, for a residual weight table `u_cache`.
inline std::pair<double, Eigen::VectorXd> stage_objective_exp(
    const Eigen::VectorXd& w_row, const Eigen::MatrixXd& u_cache,
    const Eigen::VectorXd& h_col, const std::vector<int>& labels, double nu) {
  detail::StageObjective obj(LossKind::exponential,
                             detail::log_of_weights(u_cache), h_col, labels, nu);
  Eigen::VectorXd grad;
  const double value = obj(w_row, grad);
  return {value, std::move(grad)};
}

/// Single-round logistic objective
/// sum_{i,r} log(1 + u_ir * exp(-h_i*(w_{y_i} - w_r))) + nu*|w|_1.
inline std::pair<double, Eigen::VectorXd> stage_objective_log(
    const Eigen::VectorXd& w_row, const Eigen::MatrixXd& u_cache,
    const Eigen::VectorXd& h_col, const std::vector<int>& labels, double nu) {
  detail::StageObjective obj(LossKind::logistic,
                             detail::log_of_weights(u_cache), h_col, labels, nu);
  Eigen::VectorXd grad;
  const double value = obj(w_row, grad);
  return {value, std::move(grad)};
}

namespace detail {

inline double error_from_scores(const Eigen::MatrixXd& scores,
                                const std::vector<int>& labels) {
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index arg = 0;
    scores.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) + 1 != labels[static_cast<std::size_t>(i)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(scores.rows());
}

/// Closed-form coefficient for the binary exponential reduction: the model
/// row is (alpha, 0) or (0, alpha) depending on which class column the
/// selected constraint belongs to, so that w_1 - w_2 carries the signed
/// AdaBoost coefficient.
inline Eigen::VectorXd closed_form_binary_row(const Eigen::MatrixXd& u,
                                              const Eigen::VectorXd& h,
                                              const std::vector<int>& labels,
                                              int r_star) {
  double miss = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    const double z = (y == 1) ? 1.0 : -1.0;
    const double omega = u(i, y == 1 ? 1 : 0);  // wrong-class weight
    const double aligned = (r_star == 1) ? h(i) : -h(i);
    total += omega;
    if (aligned * z < 0.0) miss += omega;
  }
  double eps = miss / total;
  eps = std::min(std::max(eps, 1e-12), 1.0 - 1e-12);
  const double alpha = 0.5 * std::log((1.0 - eps) / eps);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(2);
  row(r_star == 1 ? 0 : 1) = alpha;
  return row;
}

}  // namespace detail

/// Stage-wise training loop: select the most violated weak-learner
/// constraint, stop once no constraint is violated beyond nu + stop_slack,
/// solve the k coefficients of the new row (warm started at zero), shrink,
/// then refresh the dual weights from the full margins.
inline TrainResult train(const Dataset& data, const TrainConfig& cfg,
                         const Dataset* eval_data = nullptr,
                         const RoundCallback& observer = {}) {
  detail::check_trainable(data);
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) {
    throw DataError("train: eta must lie in (0, 1]");
  }
  if (cfg.nu < 0.0) throw DataError("train: nu must be >= 0");
  if (cfg.stop_slack <= 0.0) throw DataError("train: stop_slack must be > 0");
  if (cfg.kappa && *cfg.kappa <= 0.0) throw DataError("train: kappa must be > 0");
  if (cfg.binary_closed_form &&
      (data.k != 2 || cfg.loss != LossKind::exponential)) {
    throw DataError("train: closed-form coefficients require k = 2 and exponential loss");
  }

  const Eigen::Index m = data.rows();
  const int k = data.k;
  const FeatureOrder order(data);

  BoostModel model;
  model.k = k;
  model.loss = cfg.loss;
  model.W.resize(0, k);

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(m, k);
  Eigen::MatrixXd eval_scores;
  if (eval_data) {
    if (eval_data->k != k) throw DataError("train: eval class count mismatch");
    eval_scores = Eigen::MatrixXd::Zero(eval_data->rows(), k);
  }
  Eigen::MatrixXd duals = Eigen::MatrixXd::Constant(
      m, k, 1.0 / (static_cast<double>(m) * static_cast<double>(k)));
  MarginTable rho = MarginTable::Zero(m, k);

  TrainTrace trace;
  using clock = std::chrono::steady_clock;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    const EdgeWeights v = edge_weights(duals, data.labels);
    const StumpSearchResult pick = best_stump(data, v, order);
    if (pick.edge <= cfg.nu + cfg.stop_slack) break;

    const Eigen::VectorXd h = pick.stump.outputs(data);

    const auto t0 = clock::now();
    Eigen::VectorXd w_row;
    if (cfg.binary_closed_form) {
      w_row = detail::closed_form_binary_row(duals, h, data.labels, pick.r_star);
    } else {
      // Residual weights of the single-round subproblem, in log space:
      // exponential uses the current duals (a positive rescale of the
      // cached exp(-margin) weights, so the same minimizer); logistic uses
      // exp(-margin) itself, i.e. log weight = -margin.
      Eigen::MatrixXd log_cache = (cfg.loss == LossKind::exponential)
                                      ? detail::log_of_weights(duals)
                                      : (-rho).eval();
      detail::StageObjective objective(cfg.loss, std::move(log_cache), h,
                                       data.labels, cfg.nu);
      const SolveReport solved =
          minimize_box(std::cref(objective), Eigen::VectorXd::Zero(k), cfg.solver);
      w_row = solved.minimizer;
    }
    w_row *= cfg.eta;
    if (cfg.kappa) w_row = w_row.cwiseMin(*cfg.kappa);
    const double solve_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    model.stumps.push_back(pick.stump);
    model.W.conservativeResize(model.W.rows() + 1, k);
    model.W.row(model.W.rows() - 1) = w_row.transpose();

    scores.noalias() += h * w_row.transpose();
    rho = margins_from_scores(scores, data.labels);
    duals = dual_update(rho, cfg.loss);

    RoundRecord rec;
    rec.round = round;
    rec.stump = pick.stump;
    rec.r_star = pick.r_star;
    rec.edge = pick.edge;
    rec.objective = primal_objective(rho, model.W, cfg.nu, cfg.loss);
    rec.train_error = detail::error_from_scores(scores, data.labels);
    if (eval_data) {
      eval_scores.noalias() += pick.stump.outputs(*eval_data) * w_row.transpose();
      rec.test_error = detail::error_from_scores(eval_scores, eval_data->labels);
    }
    rec.solve_ms = solve_ms;
    trace.rounds.push_back(rec);

    if (observer) {
      observer(RoundObservation{round, model, duals, rho, pick.edge});
    }
  }

  return TrainResult{std::move(model), std::move(trace)};
}

/// Trace CSV: one row per completed boosting round.
inline void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << "round,feature,threshold,polarity,r_star,edge,objective,train_err,"
         "test_err,solve_ms\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const RoundRecord& r : trace.rounds) {
    out << r.round << ',' << r.stump.feature << ',' << num(r.stump.threshold)
        << ',' << r.stump.polarity << ',' << r.r_star << ',' << num(r.edge)
        << ',' << num(r.objective) << ',' << num(r.train_error) << ',';
    if (r.test_error) out << num(*r.test_error);
    out << ',' << num(r.solve_ms) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace swboost
