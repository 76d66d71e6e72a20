#pragma once

#include <algorithm>
#include <fstream>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swboost/booster.hpp"

namespace swboost {

/// Classic binary AdaBoost on the {+1,-1} encoding z = +1 for class 1,
/// z = -1 for class 2. Stumps are stored with polarity +1; the coefficient
/// alpha lands in column 1 when the +1 orientation is the z-positive one and
/// in column 2 otherwise, so w_1 - w_2 always carries the signed coefficient.
inline BoostModel adaboost_binary(const Dataset& data, int rounds) {
  if (data.k != 2) throw DataError("adaboost_binary: requires exactly 2 classes");
  const Eigen::Index m = data.rows();

  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    z(i) = data.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  }
  Eigen::VectorXd weight = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));

  const FeatureOrder order(data);

  BoostModel model;
  model.k = 2;
  model.loss = LossKind::exponential;
  model.W.resize(0, 2);

  for (int round = 0; round < rounds; ++round) {
    // Weighted correlation sum_i weight_i z_i h(x_i) of the polarity-+1
    // stump, scanned over sorted feature values. A negative correlation is
    // realized through column 2 instead of flipping the stump, mirroring the
    // multi-class selection's representation.
    double best_value = 0.0;
    DecisionStump best_stump_found;
    int best_col = 1;
    bool found = false;
    auto consider = [&](double value, int f, double threshold, int col) {
      if (!found || value > best_value) {
        found = true;
        best_value = value;
        best_stump_found = DecisionStump{f, threshold, +1};
        best_col = col;
      }
    };
    const double total_correlation = (weight.array() * z.array()).sum();
    for (Eigen::Index f = 0; f < data.cols(); ++f) {
      const auto& idx = order.of(static_cast<int>(f));
      double running = total_correlation;  // all samples above threshold
      const double below_min = data.features(idx[0], f) - 1.0;
      consider(running, static_cast<int>(f), below_min, 1);
      consider(-running, static_cast<int>(f), below_min, 2);
      std::size_t pos = 0;
      while (pos < static_cast<std::size_t>(m)) {
        const double value = data.features(idx[pos], f);
        while (pos < static_cast<std::size_t>(m) &&
               data.features(idx[pos], f) == value) {
          running -= 2.0 * weight(idx[pos]) * z(idx[pos]);
          ++pos;
        }
        if (pos < static_cast<std::size_t>(m)) {
          const double threshold =
              0.5 * (value + data.features(idx[pos], f));
          consider(running, static_cast<int>(f), threshold, 1);
          consider(-running, static_cast<int>(f), threshold, 2);
        }
      }
    }
    if (!found || best_value <= 0.0) break;  // nothing better than chance

    // Weighted error of the z-aligned orientation.
    const Eigen::VectorXd h = best_stump_found.outputs(data);
    double miss = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double aligned = best_col == 1 ? h(i) : -h(i);
      total += weight(i);
      if (aligned * z(i) < 0.0) miss += weight(i);
    }
    double eps = miss / total;
    if (eps >= 0.5) break;
    eps = std::max(eps, 1e-12);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);

    model.stumps.push_back(best_stump_found);
    model.W.conservativeResize(model.W.rows() + 1, 2);
    model.W.row(model.W.rows() - 1) =
        best_col == 1 ? Eigen::RowVector2d(alpha, 0.0)
                      : Eigen::RowVector2d(0.0, alpha);

    for (Eigen::Index i = 0; i < m; ++i) {
      const double aligned = best_col == 1 ? h(i) : -h(i);
      weight(i) *= std::exp(-z(i) * aligned * alpha);
    }
  }
  return model;
}

namespace detail {

/// Shared full-coefficient objective over a fixed stump set: value and
/// gradient of the regularized primal at W (flattened row-major).
class FullObjective {
 public:
  FullObjective(const Eigen::MatrixXd& outputs, const std::vector<int>& labels,
                double nu, LossKind kind, bool log_wrap)
      : outputs_(outputs), labels_(labels), nu_(nu), kind_(kind), log_wrap_(log_wrap) {}

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    const Eigen::Index t = outputs_.cols();
    const Eigen::Index k = x.size() / t;
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
        W(x.data(), t, k);
    const Eigen::MatrixXd scores = outputs_ * W;
    const MarginTable rho = margins_from_scores(scores, labels_);

    double value = nu_ * x.sum();
    Eigen::MatrixXd q(rho.rows(), k);  // per-(i,r) loss derivative weights
    if (kind_ == LossKind::exponential) {
      if (log_wrap_) {
        const double shift = (-rho).maxCoeff();
        double zsum = 0.0;
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
          for (Eigen::Index r = 0; r < k; ++r) {
            q(i, r) = std::exp(-rho(i, r) - shift);
            zsum += q(i, r);
          }
        }
        value += shift + std::log(zsum);
        q /= zsum;
      } else {
        q = (-rho).array().exp().matrix();
        value += q.sum();
      }
    } else {
      for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index r = 0; r < k; ++r) {
          value += softplus(-rho(i, r));
          q(i, r) = sigmoid(-rho(i, r));
        }
      }
    }
    // d loss / d w_jr = sum_i h_ij * (q_ir - [r == y_i] * sum_l q_il)
    Eigen::MatrixXd a = q;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      a(i, labels_[static_cast<std::size_t>(i)] - 1) -= q.row(i).sum();
    }
    Eigen::MatrixXd g = outputs_.transpose() * a;
    g.array() += nu_;
    grad.resize(x.size());
    for (Eigen::Index j = 0; j < t; ++j) {
      for (Eigen::Index r = 0; r < k; ++r) grad(j * k + r) = g(j, r);
    }
    return value;
  }

 private:
  const Eigen::MatrixXd& outputs_;
  const std::vector<int>& labels_;
  double nu_;
  LossKind kind_;
  bool log_wrap_;
};

inline Eigen::MatrixXd stump_outputs(const Dataset& data,
                                     std::span<const DecisionStump> stumps) {
  Eigen::MatrixXd h(data.rows(), static_cast<Eigen::Index>(stumps.size()));
  for (std::size_t j = 0; j < stumps.size(); ++j) {
    h.col(static_cast<Eigen::Index>(j)) = stumps[j].outputs(data);
  }
  return h;
}

}  // namespace detail

/// Reference fully-corrective solve: minimize the full regularized primal
/// over all t*k nonnegative coefficients of a fixed stump sequence. Pass
/// `warm_start` (t x k) to continue from a previous solution.
inline Eigen::MatrixXd fully_corrective(const Dataset& data,
                                        std::span<const DecisionStump> stumps,
                                        const TrainConfig& cfg,
                                        const Eigen::MatrixXd* warm_start = nullptr) {
  const auto t = static_cast<Eigen::Index>(stumps.size());
  const int k = data.k;
  if (t == 0) return Eigen::MatrixXd(0, k);
  const Eigen::MatrixXd outputs = detail::stump_outputs(data, stumps);
  detail::FullObjective objective(outputs, data.labels, cfg.nu, cfg.loss, true);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(t * k);
  if (warm_start) {
    if (warm_start->rows() != t || warm_start->cols() != k) {
      throw DataError("fully_corrective: warm start has wrong shape");
    }
    for (Eigen::Index j = 0; j < t; ++j) {
      for (Eigen::Index r = 0; r < k; ++r) x0(j * k + r) = (*warm_start)(j, r);
    }
  }
  const SolveReport report = minimize_box(std::cref(objective), x0, cfg.solver);
  Eigen::MatrixXd W(t, k);
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index r = 0; r < k; ++r) W(j, r) = report.minimizer(j * k + r);
  }
  return W;
}

/// Euclidean projection onto {x >= 0, |x|_1 <= gamma}: clamp negatives, and
/// when the l1 budget is exceeded soft-threshold by the water level that
/// lands exactly on the budget.
inline Eigen::VectorXd project_l1_box(Eigen::VectorXd x, double gamma) {
  x = x.cwiseMax(0.0);
  const double total = x.sum();
  if (total <= gamma) return x;
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    prefix += sorted[j];
    const double candidate = (prefix - gamma) / static_cast<double>(j + 1);
    if (j + 1 == sorted.size() || sorted[j + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  return (x.array() - tau).max(0.0).matrix();
}

struct L1Settings {
  int max_iterations = 5000;
  double step_tol = 1e-10;
  int restarts = 8;
  std::uint64_t seed = 1;
};

/// l1-constrained reference solve over a small fixed stump pool: minimize
/// the unregularized loss subject to W >= 0 and |W|_1 <= gamma, by projected
/// gradient with backtracking and random restarts.
inline Eigen::MatrixXd l1_constrained(const Dataset& data,
                                      std::span<const DecisionStump> pool,
                                      double gamma, LossKind kind,
                                      const L1Settings& settings = {}) {
  if (gamma < 0.0) throw DataError("l1_constrained: gamma must be >= 0");
  const auto t = static_cast<Eigen::Index>(pool.size());
  const int k = data.k;
  if (t == 0 || gamma == 0.0) return Eigen::MatrixXd::Zero(t, k);

  const Eigen::MatrixXd outputs = detail::stump_outputs(data, pool);
  detail::FullObjective objective(outputs, data.labels, 0.0, kind, false);
  const Eigen::Index n = t * k;

  Rng rng(settings.seed);
  Eigen::VectorXd best_x;
  double best_value = std::numeric_limits<double>::infinity();
  bool converged_any = false;

  for (int attempt = 0; attempt <= settings.restarts; ++attempt) {
    Eigen::VectorXd x(n);
    if (attempt == 0) {
      x.setZero();
    } else {
      for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.uniform();
      x = project_l1_box(std::move(x) * (gamma * rng.uniform(0.5, 1.5)), gamma);
    }
    Eigen::VectorXd grad(n);
    double value = objective(x, grad);
    double step = 1.0;
    bool converged = false;
    for (int iter = 0; iter < settings.max_iterations; ++iter) {
      Eigen::VectorXd x_new;
      double value_new = value;
      double step_norm = 0.0;
      bool moved = false;
      for (int h = 0; h < 60; ++h, step *= 0.5) {
        x_new = project_l1_box(x - step * grad, gamma);
        const Eigen::VectorXd delta = x_new - x;
        const double dnorm2 = delta.squaredNorm();
        if (dnorm2 == 0.0) break;
        Eigen::VectorXd grad_scratch(n);
        value_new = objective(x_new, grad_scratch);
        // standard proximal descent acceptance
        if (value_new <= value + grad.dot(delta) + dnorm2 / (2.0 * step)) {
          step_norm = delta.lpNorm<Eigen::Infinity>();
          x = std::move(x_new);
          value = value_new;
          grad = std::move(grad_scratch);
          moved = true;
          step = std::min(step * 2.0, 1e6);  // let the step grow back
          break;
        }
      }
      if (!moved || step_norm <= settings.step_tol) {
        converged = true;
        break;
      }
    }
    converged_any = converged_any || converged;
    if (value < best_value) {
      best_value = value;
      best_x = x;
    }
  }
  if (!converged_any) {
    throw SolverError("l1_constrained: no restart converged within the iteration cap");
  }
  Eigen::MatrixXd W(t, k);
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index r = 0; r < k; ++r) W(j, r) = best_x(j * k + r);
  }
  return W;
}

/// Coefficient trajectory of epsilon-step stage-wise boosting over a fixed
/// pool: at each step the most violated (stump, class) pair gains a fixed
/// small increment.
struct PathTrace {
  std::vector<DecisionStump> pool;
  int k = 0;
  double step = 0.0;
  std::vector<double> l1_norm;                // per step, equals (s+1)*step
  std::vector<Eigen::MatrixXd> snapshots;     // pool.size() x k each
};

inline PathTrace epsilon_path(const Dataset& data,
                              std::vector<DecisionStump> pool, double step = 0.01,
                              int steps = 1000,
                              LossKind kind = LossKind::exponential) {
  const auto t = static_cast<Eigen::Index>(pool.size());
  const int k = data.k;
  const Eigen::MatrixXd outputs = detail::stump_outputs(data, pool);

  PathTrace trace;
  trace.pool = std::move(pool);
  trace.k = k;
  trace.step = step;
  trace.l1_norm.reserve(static_cast<std::size_t>(steps));
  trace.snapshots.reserve(static_cast<std::size_t>(steps));

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(data.rows(), k);
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(t, k);

  for (int s = 0; s < steps; ++s) {
    const MarginTable rho = margins_from_scores(scores, data.labels);
    const Eigen::MatrixXd duals = dual_update(rho, kind);
    const EdgeWeights v = edge_weights(duals, data.labels);
    const Eigen::MatrixXd edges = outputs.transpose() * v;  // t x k
    Eigen::Index p_star = 0, r_star = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index p = 0; p < t; ++p) {
      for (Eigen::Index r = 0; r < k; ++r) {
        if (edges(p, r) > best) {
          best = edges(p, r);
          p_star = p;
          r_star = r;
        }
      }
    }
    W(p_star, r_star) += step;
    scores.col(r_star) += step * outputs.col(p_star);
    trace.l1_norm.push_back(static_cast<double>(s + 1) * step);
    trace.snapshots.push_back(W);
  }
  return trace;
}

/// Deterministic stump pool for path experiments: polarity-+1 midpoint
/// candidates ranked inside each feature by their edge under uniform initial
/// weights, then interleaved across features so small pools stay diverse.
inline std::vector<DecisionStump> make_stump_pool(const Dataset& data, int size) {
  const Eigen::Index m = data.rows();
  const int k = data.k;
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(
      m, k, 1.0 / (static_cast<double>(m) * static_cast<double>(k)));
  const EdgeWeights v = edge_weights(uniform, data.labels);

  std::vector<std::vector<std::pair<double, DecisionStump>>> per_feature(
      static_cast<std::size_t>(data.cols()));
  for (const DecisionStump& stump : enumerate_stumps(data)) {
    if (stump.polarity != 1) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (int r = 1; r <= k; ++r) best = std::max(best, edge(stump, data, v, r));
    per_feature[static_cast<std::size_t>(stump.feature)].emplace_back(best, stump);
  }
  for (auto& list : per_feature) {
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.first > b.first;
    });
  }
  std::vector<DecisionStump> pool;
  for (std::size_t rank = 0; static_cast<int>(pool.size()) < size; ++rank) {
    bool any = false;
    for (auto& list : per_feature) {
      if (rank < list.size()) {
        any = true;
        pool.push_back(list[rank].second);
        if (static_cast<int>(pool.size()) == size) break;
      }
    }
    if (!any) break;  // fewer candidates than requested
  }
  return pool;
}

/// Path CSV: `step,l1_norm,w_1,...` with W flattened row-major (stump-major).
inline void write_path_csv(const PathTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << "step,l1_norm";
  const std::size_t width = trace.pool.size() * static_cast<std::size_t>(trace.k);
  for (std::size_t j = 1; j <= width; ++j) out << ",w_" << j;
  out << '\n';
  char buf[64];
  auto num = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (std::size_t s = 0; s < trace.snapshots.size(); ++s) {
    out << (s + 1) << ',' << num(trace.l1_norm[s]);
    const Eigen::MatrixXd& W = trace.snapshots[s];
    for (Eigen::Index p = 0; p < W.rows(); ++p) {
      for (Eigen::Index r = 0; r < W.cols(); ++r) out << ',' << num(W(p, r));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace swboost
