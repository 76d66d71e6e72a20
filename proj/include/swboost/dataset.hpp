#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "swboost/common.hpp"

namespace swboost {

/// Labeled multi-class dataset. Features are stored dense, labels are
/// contiguous in {1..k} regardless of how the source file encoded them.
/// Immutable after construction; safe for concurrent reads.
struct Dataset {
  Eigen::MatrixXd features;             // m x d
  std::vector<int> labels;              // length m, values in 1..k
  int k = 0;                            // class count
  std::vector<std::string> feature_names;  // optional, length d when present
  std::vector<double> original_labels;     // original value for class r at [r-1]

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }

  std::vector<int> class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y - 1)];
    return counts;
  }
};

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

/// Map raw numeric labels to contiguous 1..k preserving numeric order.
inline std::pair<std::vector<int>, std::vector<double>> remap_labels(
    const std::vector<double>& raw) {
  std::vector<double> distinct(raw);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::map<double, int> to_index;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    to_index[distinct[i]] = static_cast<int>(i) + 1;
  }
  std::vector<int> mapped(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) mapped[i] = to_index[raw[i]];
  return {std::move(mapped), std::move(distinct)};
}

inline void check_trainable(const Dataset& data) {
  if (data.rows() < 1) throw DataError("dataset is empty");
  if (data.cols() < 1) throw DataError("dataset has no features");
  if (data.k < 2) throw DataError("training requires k >= 2 classes");
  std::vector<int> counts = data.class_counts();
  for (int c = 0; c < data.k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw DataError("class " + std::to_string(c + 1) + " has no samples");
    }
  }
}

}  // namespace detail

/// Build a dataset from already-contiguous labels, validating invariants.
inline Dataset make_dataset(Eigen::MatrixXd features, std::vector<int> labels,
                            int k) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw DataError("features and labels disagree on sample count");
  }
  for (int y : labels) {
    if (y < 1 || y > k) {
      throw DataError("label " + std::to_string(y) + " outside 1.." +
                      std::to_string(k));
    }
  }
  Dataset data;
  data.features = std::move(features);
  data.labels = std::move(labels);
  data.k = k;
  data.original_labels.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    data.original_labels[static_cast<std::size_t>(c)] = c + 1;
  }
  detail::check_trainable(data);
  return data;
}

/// Parse LIBSVM text: `<label> <idx>:<val> ...`, whitespace separated,
/// 1-based ascending feature indices. Absent indices read as 0.
inline Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  std::vector<double> raw_labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    double label;
    if (!detail::parse_double(tok, label)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": non-numeric label '" + tok + "'");
    }
    raw_labels.push_back(label);
    std::vector<std::pair<int, double>> entries;
    int prev_index = 0;
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": malformed token '" + tok + "'");
      }
      double idx_val = 0.0, val = 0.0;
      if (!detail::parse_double(tok.substr(0, colon), idx_val) ||
          idx_val != static_cast<int>(idx_val) || idx_val < 1) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad feature index in '" + tok + "'");
      }
      if (!detail::parse_double(tok.substr(colon + 1), val)) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad feature value in '" + tok + "'");
      }
      const int idx = static_cast<int>(idx_val);
      if (idx == prev_index) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": duplicate feature index " + std::to_string(idx));
      }
      if (idx < prev_index) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": feature indices not ascending at " +
                        std::to_string(idx));
      }
      prev_index = idx;
      max_index = std::max(max_index, idx);
      entries.emplace_back(idx, val);
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw DataError(path + ": empty file");
  if (max_index == 0) throw DataError(path + ": no feature entries found");

  const auto m = static_cast<Eigen::Index>(rows.size());
  Dataset data;
  data.features = Eigen::MatrixXd::Zero(m, max_index);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) {
      data.features(i, idx - 1) = val;
    }
  }
  auto [mapped, originals] = detail::remap_labels(raw_labels);
  data.labels = std::move(mapped);
  data.original_labels = std::move(originals);
  data.k = static_cast<int>(data.original_labels.size());
  detail::check_trainable(data);
  return data;
}

/// Parse a rectangular numeric CSV. A non-numeric first row is treated as a
/// header. `label_column` is 0-based.
inline Dataset load_csv(const std::string& path, int label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  std::vector<std::vector<std::string>> cells;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      row.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    cells.push_back(std::move(row));
  }
  if (cells.empty()) throw DataError(path + ": empty file");

  // Header detection: any cell of the first row that fails numeric parse.
  bool header = false;
  std::vector<std::string> names;
  {
    double ignored;
    for (const std::string& cell : cells.front()) {
      if (!detail::parse_double(cell, ignored)) {
        header = true;
        break;
      }
    }
    if (header) {
      names = cells.front();
      cells.erase(cells.begin());
      if (cells.empty()) throw DataError(path + ": header but no data rows");
    }
  }

  const std::size_t ncols = cells.front().size();
  if (label_column < 0 || static_cast<std::size_t>(label_column) >= ncols) {
    throw DataError(path + ": label column " + std::to_string(label_column) +
                    " out of range for " + std::to_string(ncols) + " columns");
  }
  if (ncols < 2) throw DataError(path + ": need at least one feature column");

  const auto m = static_cast<Eigen::Index>(cells.size());
  const auto d = static_cast<Eigen::Index>(ncols - 1);
  Dataset data;
  data.features.resize(m, d);
  std::vector<double> raw_labels(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = cells[static_cast<std::size_t>(i)];
    if (row.size() != ncols) {
      throw DataError(path + ": ragged row " + std::to_string(i + 1) +
                      " has " + std::to_string(row.size()) + " cells, expected " +
                      std::to_string(ncols));
    }
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      double value;
      if (!detail::parse_double(row[c], value)) {
        throw DataError(path + ": non-numeric cell '" + row[c] + "' in row " +
                        std::to_string(i + 1));
      }
      if (static_cast<int>(c) == label_column) {
        raw_labels[static_cast<std::size_t>(i)] = value;
      } else {
        data.features(i, j++) = value;
      }
    }
  }
  auto [mapped, originals] = detail::remap_labels(raw_labels);
  data.labels = std::move(mapped);
  data.original_labels = std::move(originals);
  data.k = static_cast<int>(data.original_labels.size());
  if (header) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (static_cast<int>(c) != label_column) {
        data.feature_names.push_back(names[c]);
      }
    }
  }
  detail::check_trainable(data);
  return data;
}

/// Write LIBSVM text with every entry explicit (including zeros, so the
/// feature count survives a round trip) at 17 significant digits.
inline void save_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double orig =
        data.original_labels[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)] - 1)];
    std::snprintf(buf, sizeof buf, "%.17g", orig);
    out << buf;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features(i, j));
      out << ' ' << (j + 1) << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Per-class cap + train/test split parameters. `train_fraction` must be
/// strictly inside (0,1).
struct SplitSpec {
  double train_fraction = 0.75;
  std::optional<int> per_class_cap;
  std::uint64_t seed = 0;
};

/// Stratified split: per class, cap by uniform sampling without replacement,
/// then send floor((1-fraction)*size) samples to the test side and the rest
/// (including the rounding leftover) to the training side. Deterministic in
/// (data, spec.seed).
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& data,
                                                    const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("train_fraction must lie strictly between 0 and 1");
  }
  if (spec.per_class_cap && *spec.per_class_cap < 1) {
    throw DataError("per_class_cap must be >= 1");
  }

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.k));
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[i] - 1)].push_back(
        static_cast<int>(i));
  }
  for (int c = 0; c < data.k; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < 2) {
      throw DataError("class " + std::to_string(c + 1) +
                      " has fewer than 2 samples");
    }
  }

  Rng rng(spec.seed);
  std::vector<int> train_idx, test_idx;
  for (int c = 0; c < data.k; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    rng.shuffle(members);
    std::size_t keep = members.size();
    if (spec.per_class_cap) {
      keep = std::min<std::size_t>(keep,
                                   static_cast<std::size_t>(*spec.per_class_cap));
    }
    const auto test_count = static_cast<std::size_t>(
        std::floor((1.0 - spec.train_fraction) * static_cast<double>(keep)));
    const std::size_t train_count = keep - test_count;
    for (std::size_t i = 0; i < train_count; ++i) train_idx.push_back(members[i]);
    for (std::size_t i = train_count; i < keep; ++i) test_idx.push_back(members[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto subset = [&](const std::vector<int>& idx) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), data.cols());
    out.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.features.row(static_cast<Eigen::Index>(i)) =
          data.features.row(idx[i]);
      out.labels[i] = data.labels[static_cast<std::size_t>(idx[i])];
    }
    out.k = data.k;
    out.feature_names = data.feature_names;
    out.original_labels = data.original_labels;
    return out;
  };
  return {subset(train_idx), subset(test_idx)};
}

/// Gaussian-blob synthetic dataset used by benchmarks and tests: k class
/// centers drawn from a seeded RNG, isotropic noise on top.
inline Dataset make_blobs(int per_class, int k, int d, double separation,
                          double noise, std::uint64_t seed) {
  if (per_class < 1 || k < 2 || d < 1) {
    throw DataError("make_blobs: need per_class >= 1, k >= 2, d >= 1");
  }
  Rng rng(seed);
  Eigen::MatrixXd centers(k, d);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) centers(c, j) = separation * rng.normal();
  }
  const Eigen::Index m = static_cast<Eigen::Index>(per_class) * k;
  Eigen::MatrixXd features(m, d);
  std::vector<int> labels(static_cast<std::size_t>(m));
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c) {
    for (int s = 0; s < per_class; ++s, ++row) {
      for (int j = 0; j < d; ++j) {
        features(row, j) = centers(c, j) + noise * rng.normal();
      }
      labels[static_cast<std::size_t>(row)] = c + 1;
    }
  }
  return make_dataset(std::move(features), std::move(labels), k);
}

}  // namespace swboost
