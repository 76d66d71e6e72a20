#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "swboost/dataset.hpp"

namespace swboost {

/// Depth-1 threshold classifier on a single feature, output in {-1,+1}:
/// predicts `polarity` when x[feature] > threshold, else `-polarity`.
struct DecisionStump {
  int feature = 0;
  double threshold = 0.0;
  int polarity = 1;  // +1 or -1

  double predict_value(double x) const {
    return x > threshold ? static_cast<double>(polarity)
                         : static_cast<double>(-polarity);
  }

  template <class Row>
  double predict(const Row& x) const {
    return predict_value(x(feature));
  }

  /// Outputs on every sample of a dataset, as a +-1 column.
  Eigen::VectorXd outputs(const Dataset& data) const {
    Eigen::VectorXd h(data.rows());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      h(i) = predict_value(data.features(i, feature));
    }
    return h;
  }

  bool operator==(const DecisionStump&) const = default;
};

/// Per-(sample,class) selection weights v_ir = [r == y_i]*(sum_l u_il) - u_ir.
/// Every row sums to zero by construction.
using EdgeWeights = Eigen::MatrixXd;

inline EdgeWeights edge_weights(const Eigen::MatrixXd& u,
                                const std::vector<int>& labels) {
  if (u.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DataError("edge_weights: weight rows do not match label count");
  }
  if ((u.array() < 0.0).any()) {
    throw DataError("edge_weights: weights must be nonnegative");
  }
  EdgeWeights v = -u;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    v(i, labels[static_cast<std::size_t>(i)] - 1) += u.row(i).sum();
  }
  return v;
}

/// Class-r edge of a stump: sum_i v_ir * h(x_i). The quantity maximized when
/// selecting the next weak learner; `r` is 1-based.
inline double edge(const DecisionStump& stump, const Dataset& data,
                   const EdgeWeights& v, int r) {
  if (v.rows() != data.rows() || r < 1 || r > v.cols()) {
    throw DataError("edge: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    total += v(i, r - 1) * stump.predict_value(data.features(i, stump.feature));
  }
  return total;
}

struct StumpSearchResult {
  DecisionStump stump;
  int r_star = 1;     // 1-based class attaining the maximum edge
  double edge = 0.0;  // always >= 0 (both polarities are searched)
  bool degenerate = false;  // no candidate had positive edge
};

/// Cached per-feature sample orderings; build once per dataset, reuse across
/// boosting rounds.
class FeatureOrder {
 public:
  explicit FeatureOrder(const Dataset& data)
      : order_(static_cast<std::size_t>(data.cols())) {
    for (Eigen::Index f = 0; f < data.cols(); ++f) {
      auto& idx = order_[static_cast<std::size_t>(f)];
      idx.resize(static_cast<std::size_t>(data.rows()));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return data.features(a, f) < data.features(b, f);
      });
    }
  }

  const std::vector<int>& of(int feature) const {
    return order_[static_cast<std::size_t>(feature)];
  }

 private:
  std::vector<std::vector<int>> order_;
};

/// Exact maximization of the edge over all features, midpoint thresholds
/// (plus one below the feature minimum), both polarities, and all classes.
/// One sorted scan per feature keeps k running class edges, updated in O(k)
/// per threshold step. Ties resolve to the lowest feature index, then lowest
/// threshold, then polarity +1, then lowest class index.
inline StumpSearchResult best_stump(const Dataset& data, const EdgeWeights& v,
                                    const FeatureOrder& order) {
  if (v.rows() != data.rows() || v.cols() != data.k) {
    throw DataError("best_stump: edge-weight shape mismatch");
  }
  const Eigen::Index m = data.rows();
  const int k = data.k;

  const Eigen::RowVectorXd totals = v.colwise().sum();

  StumpSearchResult best;
  bool have_best = false;
  // Evaluated in tie-break order, so strict `>` keeps the first maximizer.
  auto consider = [&](double value, int f, double threshold, int polarity,
                      int r) {
    if (!have_best || value > best.edge) {
      have_best = true;
      best.stump = DecisionStump{f, threshold, polarity};
      best.r_star = r;
      best.edge = value;
    }
  };

  Eigen::RowVectorXd running(k);
  for (Eigen::Index f = 0; f < data.cols(); ++f) {
    const auto& idx = order.of(static_cast<int>(f));
    // Threshold below the minimum: every sample predicted as `polarity`.
    running = totals;
    const double below_min = data.features(idx[0], f) - 1.0;
    for (int r = 0; r < k; ++r) consider(running(r), static_cast<int>(f), below_min, +1, r + 1);
    for (int r = 0; r < k; ++r) consider(-running(r), static_cast<int>(f), below_min, -1, r + 1);

    std::size_t pos = 0;
    while (pos < static_cast<std::size_t>(m)) {
      const double value = data.features(idx[pos], f);
      // Absorb the whole group of equal feature values; their prediction
      // flips from +polarity to -polarity once the threshold passes them.
      while (pos < static_cast<std::size_t>(m) &&
             data.features(idx[pos], f) == value) {
        running -= 2.0 * v.row(idx[pos]);
        ++pos;
      }
      if (pos < static_cast<std::size_t>(m)) {
        const double next = data.features(idx[pos], f);
        const double threshold = 0.5 * (value + next);
        for (int r = 0; r < k; ++r) consider(running(r), static_cast<int>(f), threshold, +1, r + 1);
        for (int r = 0; r < k; ++r) consider(-running(r), static_cast<int>(f), threshold, -1, r + 1);
      }
    }
  }
  best.degenerate = (best.edge == 0.0);
  return best;
}

inline StumpSearchResult best_stump(const Dataset& data, const EdgeWeights& v) {
  return best_stump(data, v, FeatureOrder(data));
}

/// The full finite candidate family the search ranges over: for every
/// feature, one threshold below the minimum plus midpoints between
/// consecutive distinct sorted values, in both polarities. Enumeration order
/// matches the search's tie-break order.
inline std::vector<DecisionStump> enumerate_stumps(const Dataset& data) {
  std::vector<DecisionStump> pool;
  for (Eigen::Index f = 0; f < data.cols(); ++f) {
    std::vector<double> values(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) values[static_cast<std::size_t>(i)] = data.features(i, f);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> thresholds;
    thresholds.push_back(values.front() - 1.0);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      thresholds.push_back(0.5 * (values[i] + values[i + 1]));
    }
    for (double t : thresholds) {
      pool.push_back(DecisionStump{static_cast<int>(f), t, +1});
      pool.push_back(DecisionStump{static_cast<int>(f), t, -1});
    }
  }
  return pool;
}

}  // namespace swboost
