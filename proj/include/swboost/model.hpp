#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "swboost/stumps.hpp"

namespace swboost {

enum class LossKind { exponential, logistic };

inline const char* loss_name(LossKind kind) {
  return kind == LossKind::exponential ? "exp" : "log";
}

inline LossKind loss_from_name(const std::string& name) {
  if (name == "exp" || name == "exponential") return LossKind::exponential;
  if (name == "log" || name == "logistic") return LossKind::logistic;
  throw DataError("unknown loss '" + name + "' (expected exp or log)");
}

/// Additive multi-class model: scores(x)_r = sum_j h_j(x) * W(j,r), class =
/// argmax_r with ties to the lowest index. W is nonnegative with one row per
/// stump. Immutable once training finishes; safe to share across threads.
struct BoostModel {
  std::vector<DecisionStump> stumps;
  Eigen::MatrixXd W;  // n x k, entries >= 0
  int k = 0;
  LossKind loss = LossKind::exponential;

  int rounds() const { return static_cast<int>(stumps.size()); }

  /// Smallest feature count an input must provide.
  int required_features() const {
    int need = 0;
    for (const DecisionStump& s : stumps) need = std::max(need, s.feature + 1);
    return need;
  }

  template <class Row>
  Eigen::RowVectorXd score_row(const Row& x) const {
    if (static_cast<int>(x.size()) < required_features()) {
      throw DataError("predict: input has too few features");
    }
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(k);
    for (std::size_t j = 0; j < stumps.size(); ++j) {
      s += stumps[j].predict(x) * W.row(static_cast<Eigen::Index>(j));
    }
    return s;
  }

  /// Score matrix on a dataset (m x k).
  Eigen::MatrixXd scores(const Dataset& data) const {
    if (static_cast<int>(data.cols()) < required_features()) {
      throw DataError("scores: dataset has too few features");
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(data.rows(), k);
    for (std::size_t j = 0; j < stumps.size(); ++j) {
      s.noalias() +=
          stumps[j].outputs(data) * W.row(static_cast<Eigen::Index>(j));
    }
    return s;
  }

  template <class Row>
  int predict(const Row& x) const {
    const Eigen::RowVectorXd s = score_row(x);
    Eigen::Index arg = 0;
    s.maxCoeff(&arg);  // first maximum = lowest class on ties
    return static_cast<int>(arg) + 1;
  }

  std::vector<int> predict_all(const Dataset& data) const {
    const Eigen::MatrixXd s = scores(data);
    std::vector<int> out(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      Eigen::Index arg = 0;
      s.row(i).maxCoeff(&arg);
      out[static_cast<std::size_t>(i)] = static_cast<int>(arg) + 1;
    }
    return out;
  }

  double error_rate(const Dataset& data) const {
    const std::vector<int> pred = predict_all(data);
    Eigen::Index wrong = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] != data.labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.rows());
  }
};

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const BoostModel& model,
                                    nlohmann::json config_echo = nullptr) {
  nlohmann::json j;
  j["format"] = "swboost-model";
  j["version"] = kModelFormatVersion;
  j["loss"] = loss_name(model.loss);
  j["k"] = model.k;
  j["stumps"] = nlohmann::json::array();
  for (const DecisionStump& s : model.stumps) {
    j["stumps"].push_back(
        {{"feature", s.feature}, {"threshold", s.threshold}, {"polarity", s.polarity}});
  }
  std::vector<double> w_flat;
  w_flat.reserve(static_cast<std::size_t>(model.W.size()));
  for (Eigen::Index r = 0; r < model.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.W.cols(); ++c) {
      w_flat.push_back(model.W(r, c));
    }
  }
  j["W"] = w_flat;  // row-major
  j["config"] = std::move(config_echo);
  return j;
}

inline void save_model(const BoostModel& model, const std::string& path,
                       nlohmann::json config_echo = nullptr) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << model_to_json(model, std::move(config_echo)).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline BoostModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != std::string("swboost-model")) {
    throw DataError("model file: missing or wrong format tag");
  }
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw DataError("model file: missing version field");
  }
  if (j["version"].get<int>() != kModelFormatVersion) {
    throw DataError("model file: unknown version " + j["version"].dump());
  }
  for (const char* field : {"loss", "k", "stumps", "W"}) {
    if (!j.contains(field)) {
      throw DataError(std::string("model file: missing field '") + field + "'");
    }
  }
  BoostModel model;
  model.loss = loss_from_name(j["loss"].get<std::string>());
  model.k = j["k"].get<int>();
  if (model.k < 2) throw DataError("model file: k must be >= 2");
  for (const auto& js : j["stumps"]) {
    DecisionStump s;
    s.feature = js.at("feature").get<int>();
    s.threshold = js.at("threshold").get<double>();
    s.polarity = js.at("polarity").get<int>();
    if (s.polarity != 1 && s.polarity != -1) {
      throw DataError("model file: polarity must be +1 or -1");
    }
    model.stumps.push_back(s);
  }
  const auto& w = j["W"];
  const auto n = static_cast<Eigen::Index>(model.stumps.size());
  if (!w.is_array() ||
      w.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(model.k)) {
    throw DataError("model file: W size does not match stumps x k");
  }
  model.W.resize(n, model.k);
  std::size_t pos = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < model.k; ++c) {
      model.W(r, c) = w[pos++].get<double>();
    }
  }
  if ((model.W.array() < 0.0).any()) {
    throw DataError("model file: W has negative entries");
  }
  return model;
}

inline BoostModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace swboost
