#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swboost/common.hpp"

namespace swboost {

struct SolverSettings {
  int max_iterations = 100;
  double projected_gradient_tol = 1e-5;
  double objective_decrease_tol = 1e-9;
  int memory_pairs = 10;
};

enum class Termination { gradient_tol, objective_tol, max_iter };

struct SolveReport {
  Eigen::VectorXd minimizer;  // >= 0 elementwise
  double objective = 0.0;
  int iterations = 0;
  Termination termination = Termination::max_iter;
};

/// Objective callable: fills `grad` and returns the value at `x`.
using BoxObjective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Minimize a smooth convex function over the nonnegative orthant.
/// Gradient projection identifies the active bounds, a limited-memory
/// quasi-Newton direction drives the free variables, and a backtracking
/// Armijo line search (c = 1e-4, halving) along the projected path keeps the
/// objective monotone non-increasing. Falls back to the projected steepest
/// descent direction whenever the quasi-Newton direction fails the descent
/// test.
inline SolveReport minimize_box(const BoxObjective& f, const Eigen::VectorXd& x0,
                                const SolverSettings& settings = {}) {
  constexpr double kArmijoC = 1e-4;
  constexpr int kMaxHalvings = 60;

  const Eigen::Index q = x0.size();
  Eigen::VectorXd x = x0.cwiseMax(0.0);
  Eigen::VectorXd grad(q);
  double value = f(x, grad);
  auto check_finite = [&](double v, const Eigen::VectorXd& g) {
    if (!std::isfinite(v) || !g.allFinite()) {
      throw SolverError("minimize_box: non-finite objective or gradient");
    }
  };
  check_finite(value, grad);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;  // (s, y)

  SolveReport report;
  report.termination = Termination::max_iter;

  int iter = 0;
  for (; iter < settings.max_iterations; ++iter) {
    // Projected gradient: at an active lower bound only the inward
    // (negative) component counts.
    Eigen::VectorXd pg = grad;
    for (Eigen::Index i = 0; i < q; ++i) {
      if (x(i) <= 0.0 && grad(i) > 0.0) pg(i) = 0.0;
    }
    if (pg.lpNorm<Eigen::Infinity>() <= settings.projected_gradient_tol) {
      report.termination = Termination::gradient_tol;
      break;
    }

    // Two-loop recursion on the free subspace (active coordinates masked).
    Eigen::VectorXd direction = -pg;
    if (!pairs.empty()) {
      Eigen::VectorXd qvec = pg;
      std::vector<double> alpha(pairs.size());
      for (std::size_t i = pairs.size(); i-- > 0;) {
        const auto& [s, y] = pairs[i];
        const double rho = 1.0 / y.dot(s);
        alpha[i] = rho * s.dot(qvec);
        qvec -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = pairs.back();
      qvec *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [s, y] = pairs[i];
        const double rho = 1.0 / y.dot(s);
        const double beta = rho * y.dot(qvec);
        qvec += (alpha[i] - beta) * s;
      }
      for (Eigen::Index i = 0; i < q; ++i) {
        if (x(i) <= 0.0 && grad(i) > 0.0) qvec(i) = 0.0;
      }
      direction = -qvec;
      if (direction.dot(grad) >= 0.0) direction = -pg;  // descent fallback
    }

    // Backtracking along the projected path.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new(q), grad_new(q);
    double value_new = value;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      x_new = (x + step * direction).cwiseMax(0.0);
      const double predicted = grad.dot(x_new - x);
      if (predicted >= 0.0) continue;  // projection removed all progress
      value_new = f(x_new, grad_new);
      check_finite(value_new, grad_new);
      if (value_new <= value + kArmijoC * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No measurable decrease along either direction: converged to
      // numerical precision.
      report.termination = Termination::objective_tol;
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      pairs.emplace_back(s, y);
      while (pairs.size() > static_cast<std::size_t>(settings.memory_pairs)) {
        pairs.pop_front();
      }
    }

    const double decrease = value - value_new;
    x = x_new;
    grad = grad_new;
    value = value_new;
    if (decrease <= settings.objective_decrease_tol) {
      ++iter;
      report.termination = Termination::objective_tol;
      break;
    }
  }

  report.minimizer = std::move(x);
  report.objective = value;
  report.iterations = iter;
  return report;
}

}  // namespace swboost
