#include <catch2/catch_amalgamated.hpp>

#include "oracle_helpers.hpp"
#include "swboost/oracles.hpp"

using swboost::BoostModel;
using swboost::Dataset;
using swboost::DecisionStump;
using swboost::LossKind;
using swboost::Rng;
using swboost::TrainConfig;

namespace {

Dataset line_dataset(std::vector<double> xs, std::vector<int> labels, int k) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
  return swboost::make_dataset(std::move(x), std::move(labels), k);
}

}  // namespace

TEST_CASE("adaboost coefficient for a quarter-error stump") {
  // best achievable weighted error on this instance is exactly 1/4
  const Dataset data = line_dataset({1, 2, 3, 4}, {1, 2, 1, 2}, 2);
  const BoostModel model = swboost::adaboost_binary(data, 1);
  REQUIRE(model.rounds() == 1);
  const double alpha = model.W.row(0).maxCoeff();
  CHECK(alpha == Catch::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
  CHECK(model.W.row(0).minCoeff() == 0.0);
}

TEST_CASE("adaboost stops when no stump beats chance") {
  // identical feature values: only the all-positive stump exists, and the
  // labels cancel, so the best correlation is zero (error one half)
  const Dataset data = line_dataset({1, 1}, {1, 2}, 2);
  const BoostModel model = swboost::adaboost_binary(data, 10);
  CHECK(model.rounds() == 0);
}

TEST_CASE("adaboost drives a separable problem to zero training error") {
  std::vector<double> xs;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i);
    labels.push_back(i < 10 ? 1 : 2);
  }
  const Dataset data = line_dataset(xs, labels, 2);
  const BoostModel model = swboost::adaboost_binary(data, 10);
  CHECK(model.rounds() <= 10);
  CHECK(model.error_rate(data) == 0.0);
}

TEST_CASE("updated weights make the chosen stump look like chance") {
  // classic orthogonality: after the round-t update, the weighted error of
  // stump t is exactly one half
  Rng rng(67);
  const Dataset data = testutil::random_dataset(rng, 30, 3, 2);
  const BoostModel model = swboost::adaboost_binary(data, 15);
  REQUIRE(model.rounds() >= 3);

  const Eigen::Index m = data.rows();
  Eigen::VectorXd z(m), weight = Eigen::VectorXd::Constant(m, 1.0 / m);
  for (Eigen::Index i = 0; i < m; ++i) {
    z(i) = data.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  }
  for (int t = 0; t < model.rounds(); ++t) {
    const auto& stump = model.stumps[static_cast<std::size_t>(t)];
    const double alpha = model.W.row(t).maxCoeff();
    const int col = model.W(t, 0) >= model.W(t, 1) ? 1 : 2;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double h = stump.predict(data.features.row(i));
      const double aligned = col == 1 ? h : -h;
      weight(i) *= std::exp(-z(i) * aligned * alpha);
    }
    const double total = weight.sum();
    CHECK(total > 0.0);
    CHECK(std::isfinite(total));
    double miss = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double h = stump.predict(data.features.row(i));
      const double aligned = col == 1 ? h : -h;
      if (aligned * z(i) < 0.0) miss += weight(i);
    }
    CHECK(miss / total == Catch::Approx(0.5).margin(1e-10));
  }
}

TEST_CASE("fully corrective solve dominates the stage-wise objective") {
  const Dataset data = swboost::make_blobs(7, 3, 2, 2.0, 1.3, 71);
  TrainConfig cfg;
  cfg.loss = LossKind::exponential;
  cfg.eta = 1.0;
  cfg.nu = 1e-6;
  cfg.max_rounds = 8;
  cfg.stop_slack = 1e-9;
  cfg.solver.max_iterations = 300;
  cfg.solver.projected_gradient_tol = 1e-8;
  cfg.solver.objective_decrease_tol = 1e-13;

  const auto staged = swboost::train(data, cfg);
  REQUIRE(staged.model.rounds() >= 2);
  const Eigen::MatrixXd corrected =
      swboost::fully_corrective(data, staged.model.stumps, cfg);

  BoostModel fc_model = staged.model;
  fc_model.W = corrected;
  const double staged_obj = swboost::primal_objective(
      swboost::margins(staged.model, data), staged.model.W, cfg.nu, cfg.loss);
  const double fc_obj = swboost::primal_objective(
      swboost::margins(fc_model, data), corrected, cfg.nu, cfg.loss);
  CHECK(fc_obj <= staged_obj + 1e-8);
}

TEST_CASE("single-stump fully corrective equals the first stage-wise solve") {
  const Dataset data = swboost::make_blobs(8, 3, 2, 2.0, 1.0, 73);
  TrainConfig cfg;
  cfg.loss = LossKind::exponential;
  cfg.eta = 1.0;
  cfg.nu = 1e-6;
  cfg.max_rounds = 1;
  cfg.solver.max_iterations = 300;
  cfg.solver.projected_gradient_tol = 1e-9;
  cfg.solver.objective_decrease_tol = 1e-14;

  const auto staged = swboost::train(data, cfg);
  REQUIRE(staged.model.rounds() == 1);
  const Eigen::MatrixXd corrected =
      swboost::fully_corrective(data, staged.model.stumps, cfg);
  CHECK((corrected.row(0) - staged.model.W.row(0)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duality gap closes at the fully corrective optimum") {
  Rng rng(79);
  for (const LossKind kind : {LossKind::exponential, LossKind::logistic}) {
    const Dataset data = testutil::random_dataset(rng, 15, 2, 3);
    const std::vector<DecisionStump> pool = swboost::make_stump_pool(data, 8);
    REQUIRE(pool.size() == 8);
    TrainConfig cfg;
    cfg.loss = kind;
    cfg.nu = 1e-4;
    cfg.solver.max_iterations = 800;
    cfg.solver.projected_gradient_tol = 1e-9;
    cfg.solver.objective_decrease_tol = 1e-15;

    const Eigen::MatrixXd w = swboost::fully_corrective(data, pool, cfg);
    BoostModel model;
    model.k = data.k;
    model.loss = kind;
    model.stumps = pool;
    model.W = w;
    const Eigen::MatrixXd rho = swboost::margins(model, data);
    const double primal = swboost::primal_objective(rho, w, cfg.nu, kind);
    const double dual = swboost::dual_objective(swboost::dual_update(rho, kind), kind);
    // the dual function value is the negated entropy term, so the gap is
    // primal + dual and vanishes at the optimum
    const double gap = primal + dual;
    CHECK(gap >= -1e-6);
    CHECK(gap <= 1e-4);
  }
}

TEST_CASE("l1 projection is the nearest feasible point") {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const double gamma = rng.uniform(0.1, 3.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd p = swboost::project_l1_box(x, gamma);
    REQUIRE(p.minCoeff() >= 0.0);
    REQUIRE(p.sum() <= gamma + 1e-12);
    // any random feasible point is no closer to x
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXd y(n);
      for (int i = 0; i < n; ++i) y(i) = rng.uniform(0.0, 1.0);
      const double total = y.sum();
      if (total > gamma) y *= gamma / total * rng.uniform();
      CHECK((x - p).squaredNorm() <= (x - y).squaredNorm() + 1e-12);
    }
  }
}

TEST_CASE("l1-constrained solutions satisfy and activate the budget") {
  const Dataset data = swboost::make_blobs(7, 3, 2, 2.5, 0.9, 89);
  const std::vector<DecisionStump> pool = swboost::make_stump_pool(data, 8);

  SECTION("zero budget") {
    const Eigen::MatrixXd w =
        swboost::l1_constrained(data, pool, 0.0, LossKind::exponential);
    CHECK(w.isZero(0.0));
  }
  SECTION("active budget on a fit-hungry instance") {
    const Eigen::MatrixXd w =
        swboost::l1_constrained(data, pool, 2.0, LossKind::exponential);
    CHECK(w.minCoeff() >= -1e-8);
    CHECK(w.sum() <= 2.0 + 1e-8);
    // exponential loss keeps improving with margin scale, so the budget binds
    CHECK(w.sum() == Catch::Approx(2.0).margin(1e-6));
  }
  SECTION("heavier restarts find no better objective") {
    swboost::L1Settings light;
    light.restarts = 2;
    light.seed = 5;
    swboost::L1Settings heavy;
    heavy.restarts = 24;
    heavy.seed = 1234;
    heavy.max_iterations = 20000;
    for (const LossKind kind : {LossKind::exponential, LossKind::logistic}) {
      const Eigen::MatrixXd w_light =
          swboost::l1_constrained(data, pool, 2.0, kind, light);
      const Eigen::MatrixXd w_heavy =
          swboost::l1_constrained(data, pool, 2.0, kind, heavy);
      BoostModel probe;
      probe.k = data.k;
      probe.stumps = pool;
      probe.W = w_light;
      const double f_light = swboost::primal_objective(
          swboost::margins(probe, data), w_light, 0.0, kind);
      probe.W = w_heavy;
      const double f_heavy = swboost::primal_objective(
          swboost::margins(probe, data), w_heavy, 0.0, kind);
      CHECK(f_light <= f_heavy + 1e-4);
    }
  }
}

TEST_CASE("epsilon path accounting") {
  const Dataset data = swboost::make_blobs(7, 3, 2, 2.0, 1.1, 97);
  std::vector<DecisionStump> pool = swboost::make_stump_pool(data, 6);
  const swboost::PathTrace trace =
      swboost::epsilon_path(data, pool, 0.01, 200, LossKind::exponential);

  REQUIRE(trace.snapshots.size() == 200);
  for (int s = 0; s < 200; ++s) {
    CHECK(trace.l1_norm[static_cast<std::size_t>(s)] ==
          Catch::Approx((s + 1) * 0.01).margin(1e-12));
    CHECK(std::abs(trace.snapshots[static_cast<std::size_t>(s)].sum() -
                   trace.l1_norm[static_cast<std::size_t>(s)]) < 1e-10);
  }
  // coefficients never decrease
  for (std::size_t s = 1; s < trace.snapshots.size(); ++s) {
    CHECK(((trace.snapshots[s] - trace.snapshots[s - 1]).array() >= -1e-15).all());
  }
}

TEST_CASE("label swap mirrors the binary epsilon path") {
  Rng rng(101);
  const Dataset data = testutil::random_dataset(rng, 10, 2, 2);
  Dataset swapped = data;
  for (auto& y : swapped.labels) y = 3 - y;
  std::vector<DecisionStump> pool = swboost::make_stump_pool(data, 4);

  const auto path_a = swboost::epsilon_path(data, pool, 0.01, 150, LossKind::logistic);
  const auto path_b =
      swboost::epsilon_path(swapped, pool, 0.01, 150, LossKind::logistic);
  const Eigen::MatrixXd& wa = path_a.snapshots.back();
  const Eigen::MatrixXd& wb = path_b.snapshots.back();
  CHECK((wa.col(0) - wb.col(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((wa.col(1) - wb.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stump pools are deterministic, distinct, and sized") {
  const Dataset data = swboost::make_blobs(10, 3, 3, 2.0, 1.0, 103);
  const auto pool_a = swboost::make_stump_pool(data, 8);
  const auto pool_b = swboost::make_stump_pool(data, 8);
  REQUIRE(pool_a.size() == 8);
  CHECK(pool_a == pool_b);
  for (std::size_t i = 0; i < pool_a.size(); ++i) {
    for (std::size_t j = i + 1; j < pool_a.size(); ++j) {
      CHECK(!(pool_a[i] == pool_a[j]));
    }
  }
}
