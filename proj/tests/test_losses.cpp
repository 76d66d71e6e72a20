#include <catch2/catch_amalgamated.hpp>

#include "oracle_helpers.hpp"
#include "swboost/losses.hpp"

using swboost::BoostModel;
using swboost::Dataset;
using swboost::DecisionStump;
using swboost::LossKind;
using swboost::Rng;

namespace {

BoostModel random_model(Rng& rng, int d, int k, int n) {
  BoostModel model;
  model.k = k;
  model.loss = LossKind::exponential;
  model.W.resize(n, k);
  for (int j = 0; j < n; ++j) {
    model.stumps.push_back(DecisionStump{
        static_cast<int>(rng.below(static_cast<std::size_t>(d))),
        rng.uniform(-2.0, 2.0), rng.below(2) == 0 ? 1 : -1});
    for (int r = 0; r < k; ++r) model.W(j, r) = rng.uniform();
  }
  return model;
}

}  // namespace

TEST_CASE("margins from a model") {
  SECTION("empty model gives all zeros") {
    const Dataset data = swboost::make_blobs(4, 2, 2, 2.0, 1.0, 1);
    BoostModel model;
    model.k = 2;
    model.W.resize(0, 2);
    const Eigen::MatrixXd rho = swboost::margins(model, data);
    CHECK(rho.isZero(0.0));
  }
  SECTION("single always-positive stump") {
    Eigen::MatrixXd x(1, 1);
    x << 5.0;
    Dataset data;
    data.features = x;
    data.labels = {1};
    data.k = 2;
    BoostModel model;
    model.k = 2;
    model.stumps.push_back(DecisionStump{0, 0.0, +1});
    model.W.resize(1, 2);
    model.W << 0.7, 0.2;
    const Eigen::MatrixXd rho = swboost::margins(model, data);
    CHECK(rho(0, 0) == 0.0);
    CHECK(rho(0, 1) == Catch::Approx(0.5).margin(1e-15));
  }
  SECTION("random instances match a naive recomputation") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const Dataset data = testutil::random_dataset(rng, 5, 3, 3);
      const BoostModel model = random_model(rng, 3, 3, 4);
      const Eigen::MatrixXd rho = swboost::margins(model, data);
      const Eigen::MatrixXd expected = testutil::naive_margins(model, data);
      CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-12);
      // true-class margin is exactly zero, not merely close
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        CHECK(rho(i, data.labels[static_cast<std::size_t>(i)] - 1) == 0.0);
      }
    }
  }
}

TEST_CASE("primal objective values") {
  const Eigen::MatrixXd rho0 = Eigen::MatrixXd::Zero(1, 2);
  const Eigen::MatrixXd w0 = Eigen::MatrixXd::Zero(0, 2);
  CHECK(swboost::primal_objective(rho0, w0, 0.0, LossKind::exponential) ==
        Catch::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(swboost::primal_objective(rho0, w0, 0.0, LossKind::logistic) ==
        Catch::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  SECTION("huge negative margins stay finite") {
    Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(3, 4, -1000.0);
    const double exp_val =
        swboost::primal_objective(rho, w0, 0.0, LossKind::exponential);
    CHECK(std::isfinite(exp_val));
    CHECK(exp_val == Catch::Approx(1000.0 + std::log(12.0)).epsilon(1e-12));
    CHECK(std::isfinite(
        swboost::primal_objective(rho, w0, 0.0, LossKind::logistic)));
  }
  SECTION("regularization term uses the l1 norm") {
    Eigen::MatrixXd w(2, 2);
    w << 1.0, 2.0, 3.0, 4.0;
    const double base =
        swboost::primal_objective(rho0, Eigen::MatrixXd::Zero(2, 2), 0.0,
                                  LossKind::exponential);
    CHECK(swboost::primal_objective(rho0, w, 0.5, LossKind::exponential) ==
          Catch::Approx(base + 5.0).epsilon(1e-12));
  }
  SECTION("negative coefficients rejected") {
    Eigen::MatrixXd w(1, 2);
    w << 0.5, -0.1;
    CHECK_THROWS_AS(swboost::primal_objective(rho0, w, 0.0, LossKind::exponential),
                    swboost::DataError);
  }
}

TEST_CASE("dual update") {
  SECTION("zero margins give the uniform / half tables") {
    const Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(3, 2);
    const Eigen::MatrixXd u_exp = swboost::dual_update(rho, LossKind::exponential);
    CHECK((u_exp.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);
    const Eigen::MatrixXd u_log = swboost::dual_update(rho, LossKind::logistic);
    CHECK((u_log.array() - 0.5).abs().maxCoeff() < 1e-15);
  }
  SECTION("saturated margins drive weights to zero") {
    Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(1, 2);
    rho(0, 1) = 1e6;
    CHECK(swboost::dual_update(rho, LossKind::exponential)(0, 1) == 0.0);
    CHECK(swboost::dual_update(rho, LossKind::logistic)(0, 1) == 0.0);
    rho(0, 1) = 40.0;  // large but representable
    CHECK(swboost::dual_update(rho, LossKind::exponential)(0, 1) < 1e-15);
    CHECK(swboost::dual_update(rho, LossKind::logistic)(0, 1) < 1e-15);
  }
  SECTION("exponential normalization and logistic range on random margins") {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      const int m = 1 + static_cast<int>(rng.below(40));
      const int k = 2 + static_cast<int>(rng.below(4));
      Eigen::MatrixXd rho(m, k);
      for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) = rng.uniform(-30.0, 30.0);
      const Eigen::MatrixXd u_exp = swboost::dual_update(rho, LossKind::exponential);
      CHECK(std::abs(u_exp.sum() - 1.0) < 1e-12);
      CHECK((u_exp.array() >= 0.0).all());
      const Eigen::MatrixXd u_log = swboost::dual_update(rho, LossKind::logistic);
      CHECK((u_log.array() > 0.0).all());
      CHECK((u_log.array() < 1.0).all());
    }
  }
}

TEST_CASE("dual objective") {
  SECTION("uniform exponential weights attain -log(mk)") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(5, 3, 1.0 / 15.0);
    CHECK(swboost::dual_objective(u, LossKind::exponential) ==
          Catch::Approx(-std::log(15.0)).epsilon(1e-12));
  }
  SECTION("all-half logistic weights") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(4, 3, 0.5);
    CHECK(swboost::dual_objective(u, LossKind::logistic) ==
          Catch::Approx(-12.0 * std::log(2.0)).epsilon(1e-12));
  }
  SECTION("saturated logistic entries contribute nothing") {
    Eigen::MatrixXd u(1, 3);
    u << 0.0, 1.0, 0.5;
    CHECK(swboost::dual_objective(u, LossKind::logistic) ==
          Catch::Approx(-std::log(2.0)).epsilon(1e-12));
  }
  SECTION("broken normalization rejected for exponential") {
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(2, 2, 0.3);
    CHECK_THROWS_AS(swboost::dual_objective(u, LossKind::exponential),
                    swboost::DataError);
  }
}

TEST_CASE("dual infeasibility equals the brute-force worst violation") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset data = testutil::random_dataset(rng, 10, 2, 3);
    Eigen::MatrixXd rho(10, 3);
    for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) = rng.uniform(-1.0, 1.0);
    const Eigen::MatrixXd u = swboost::dual_update(rho, LossKind::exponential);
    const double nu = 0.01;

    // library value over the full family
    const double fast = swboost::dual_infeasibility(u, data, nu);
    // exhaustive candidate enumeration with direct sums
    const Eigen::MatrixXd v = swboost::edge_weights(u, data.labels);
    const auto brute = testutil::brute_force_best_stump(data, v);
    CHECK(fast == Catch::Approx(brute.edge - nu).margin(1e-12));

    // explicit-pool overload agrees when handed the whole family
    const auto pool = swboost::enumerate_stumps(data);
    const double pooled = swboost::dual_infeasibility(u, data, pool, nu);
    CHECK(pooled == Catch::Approx(fast).margin(1e-12));
  }
  SECTION("large nu certifies feasibility") {
    const Dataset data = testutil::random_dataset(rng, 8, 2, 2);
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(8, 2, 1.0 / 16.0);
    CHECK(swboost::dual_infeasibility(u, data, 100.0) < 0.0);
  }
}
