#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "swboost/oracles.hpp"

namespace swboost {

struct DataSpec {
  std::string path;
  std::string format = "libsvm";  // "libsvm" or "csv"
  int label_col = 0;              // csv only
};

inline Dataset load_data(const DataSpec& spec) {
  if (spec.format == "libsvm") return load_libsvm(spec.path);
  if (spec.format == "csv") return load_csv(spec.path, spec.label_col);
  throw DataError("unknown format '" + spec.format + "' (expected libsvm or csv)");
}

/// Worker cap: SWBOOST_THREADS when set, hardware concurrency otherwise.
inline unsigned max_threads() {
  if (const char* env = std::getenv("SWBOOST_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {

/// Run `count` independent jobs on up to max_threads() workers; job i writes
/// only slot i of its output, so the result order is deterministic.
template <class Fn>
void parallel_for_index(int count, Fn&& fn) {
  const unsigned workers =
      std::min<unsigned>(max_threads(), static_cast<unsigned>(std::max(count, 1)));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (int i = static_cast<int>(w); i < count; i += static_cast<int>(workers)) {
        fn(i);
      }
    });
  }
  for (std::thread& t : threads) t.join();
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// train

struct TrainCommand {
  DataSpec data;
  TrainConfig cfg;
  std::optional<double> train_frac;  // set: hold out a stratified test split
  std::optional<int> per_class;
  std::string model_out;
  std::string trace_out;  // empty: skip
};

inline nlohmann::json run_train(const TrainCommand& cmd) {
  const Dataset full = load_data(cmd.data);
  std::optional<std::pair<Dataset, Dataset>> split;
  if (cmd.train_frac || cmd.per_class) {
    SplitSpec spec;
    spec.train_fraction = cmd.train_frac.value_or(0.75);
    spec.per_class_cap = cmd.per_class;
    spec.seed = cmd.cfg.seed;
    split = stratified_split(full, spec);
  }
  const Dataset& train_data = split ? split->first : full;
  const Dataset* eval_data = split ? &split->second : nullptr;

  const TrainResult result = train(train_data, cmd.cfg, eval_data);

  nlohmann::json config_echo = {
      {"loss", loss_name(cmd.cfg.loss)},   {"nu", cmd.cfg.nu},
      {"eta", cmd.cfg.eta},                {"max_rounds", cmd.cfg.max_rounds},
      {"stop_slack", cmd.cfg.stop_slack},  {"seed", cmd.cfg.seed},
  };
  if (cmd.cfg.kappa) config_echo["kappa"] = *cmd.cfg.kappa;
  if (!cmd.model_out.empty()) save_model(result.model, cmd.model_out, config_echo);
  if (!cmd.trace_out.empty()) write_trace_csv(result.trace, cmd.trace_out);

  nlohmann::json summary;
  summary["rounds"] = result.model.rounds();
  summary["stopped_early"] = result.model.rounds() < cmd.cfg.max_rounds;
  summary["train_error"] = result.model.error_rate(train_data);
  if (eval_data) {
    summary["test_error"] = result.model.error_rate(*eval_data);
  } else {
    summary["test_error"] = nullptr;
  }
  if (!cmd.model_out.empty()) summary["model"] = cmd.model_out;
  if (!cmd.trace_out.empty()) summary["trace"] = cmd.trace_out;
  return summary;
}

// ---------------------------------------------------------------------------
// predict / eval

inline nlohmann::json run_eval(const std::string& model_path, const DataSpec& data) {
  const BoostModel model = load_model(model_path);
  const Dataset test = load_data(data);
  nlohmann::json out;
  out["samples"] = static_cast<int>(test.rows());
  out["error"] = model.error_rate(test);
  return out;
}

inline void run_predict(const std::string& model_path, const DataSpec& data,
                        std::ostream& out) {
  const BoostModel model = load_model(model_path);
  const Dataset input = load_data(data);
  const std::vector<int> pred = model.predict_all(input);
  out << "index,label\n";
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out << i << ',' << pred[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// sweep

enum class SweepParam { nu, eta };

struct SweepCommand {
  DataSpec data;
  TrainConfig base;
  SweepParam param = SweepParam::nu;
  std::vector<double> values;
  int repeats = 1;
  std::uint64_t seed_base = 0;
  std::optional<int> per_class;
  double train_frac = 0.75;
  std::string out_csv;
};

struct SweepCell {
  double value = 0.0;
  int repeat = 0;
  std::uint64_t seed = 0;
  double test_error = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;                  // value-major, repeat-minor
  std::vector<std::pair<double, double>> stats;  // per value: mean, sample std
};

inline SweepResult run_sweep_result(const SweepCommand& cmd) {
  if (cmd.repeats < 1) throw DataError("sweep: repeats must be >= 1");
  if (cmd.values.empty()) throw DataError("sweep: need at least one value");
  const Dataset full = load_data(cmd.data);

  const int jobs = static_cast<int>(cmd.values.size()) * cmd.repeats;
  SweepResult result;
  result.cells.resize(static_cast<std::size_t>(jobs));
  detail::parallel_for_index(jobs, [&](int j) {
    const int vi = j / cmd.repeats;
    const int rep = j % cmd.repeats;
    TrainConfig cfg = cmd.base;
    if (cmd.param == SweepParam::nu) {
      cfg.nu = cmd.values[static_cast<std::size_t>(vi)];
    } else {
      cfg.eta = cmd.values[static_cast<std::size_t>(vi)];
    }
    const std::uint64_t seed = cmd.seed_base + static_cast<std::uint64_t>(rep);
    cfg.seed = seed;
    SplitSpec spec;
    spec.train_fraction = cmd.train_frac;
    spec.per_class_cap = cmd.per_class;
    spec.seed = seed;
    const auto [train_set, test_set] = stratified_split(full, spec);
    const TrainResult trained = train(train_set, cfg);
    result.cells[static_cast<std::size_t>(j)] = SweepCell{
        cmd.values[static_cast<std::size_t>(vi)], rep, seed,
        trained.model.error_rate(test_set)};
  });

  for (std::size_t vi = 0; vi < cmd.values.size(); ++vi) {
    double mean = 0.0;
    for (int rep = 0; rep < cmd.repeats; ++rep) {
      mean += result.cells[vi * static_cast<std::size_t>(cmd.repeats) +
                           static_cast<std::size_t>(rep)].test_error;
    }
    mean /= cmd.repeats;
    double var = 0.0;
    for (int rep = 0; rep < cmd.repeats; ++rep) {
      const double d = result.cells[vi * static_cast<std::size_t>(cmd.repeats) +
                                    static_cast<std::size_t>(rep)].test_error - mean;
      var += d * d;
    }
    const double std_dev = cmd.repeats > 1 ? std::sqrt(var / (cmd.repeats - 1)) : 0.0;
    result.stats.emplace_back(mean, std_dev);
  }
  return result;
}

/// CSV layout: one `param,repeat,seed,test_error` row per run, then per
/// parameter two summary rows with `repeat` set to `mean` / `std`.
inline void write_sweep_csv(const SweepCommand& cmd, const SweepResult& result,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << "param,repeat,seed,test_error\n";
  for (const SweepCell& cell : result.cells) {
    out << detail::format_double(cell.value) << ',' << cell.repeat << ','
        << cell.seed << ',' << detail::format_double(cell.test_error) << '\n';
  }
  for (std::size_t vi = 0; vi < cmd.values.size(); ++vi) {
    const auto& [mean, std_dev] = result.stats[vi];
    out << detail::format_double(cmd.values[vi]) << ",mean,,"
        << detail::format_double(mean) << '\n';
    out << detail::format_double(cmd.values[vi]) << ",std,,"
        << detail::format_double(std_dev) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json run_sweep(const SweepCommand& cmd) {
  const SweepResult result = run_sweep_result(cmd);
  if (!cmd.out_csv.empty()) write_sweep_csv(cmd, result, cmd.out_csv);
  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t vi = 0; vi < cmd.values.size(); ++vi) {
    summary.push_back({{"param", cmd.values[vi]},
                       {"mean", result.stats[vi].first},
                       {"std", result.stats[vi].second}});
  }
  nlohmann::json out;
  out["param"] = cmd.param == SweepParam::nu ? "nu" : "eta";
  out["repeats"] = cmd.repeats;
  out["summary"] = summary;
  if (!cmd.out_csv.empty()) out["csv"] = cmd.out_csv;
  return out;
}

// ---------------------------------------------------------------------------
// bench

struct BenchCommand {
  DataSpec data;
  TrainConfig cfg;
  int fc_cap = 5000;  // skip fully-corrective solves once t*k exceeds this
  std::string out_csv;
};

struct BenchResult {
  std::vector<double> stagewise_ms;                 // per round
  std::vector<std::optional<double>> corrective_ms;  // per round, empty if skipped
};

/// Train stage-wise, then re-solve the coefficient problem fully-correctively
/// over each prefix of the same stump sequence (warm started from the
/// previous prefix solution). Timings cover the coefficient solves only.
inline BenchResult run_bench_result(const Dataset& data, const TrainConfig& cfg,
                                    int fc_cap) {
  const TrainResult staged = train(data, cfg);
  BenchResult result;
  for (const RoundRecord& rec : staged.trace.rounds) {
    result.stagewise_ms.push_back(rec.solve_ms);
  }

  const int n = staged.model.rounds();
  const int k = data.k;
  Eigen::MatrixXd outputs(data.rows(), n);
  for (int j = 0; j < n; ++j) {
    outputs.col(j) = staged.model.stumps[static_cast<std::size_t>(j)].outputs(data);
  }
  using clock = std::chrono::steady_clock;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(0);
  for (int t = 1; t <= n; ++t) {
    if (static_cast<long>(t) * k > fc_cap) {
      result.corrective_ms.emplace_back(std::nullopt);
      continue;
    }
    const Eigen::MatrixXd head = outputs.leftCols(t);
    detail::FullObjective objective(head, data.labels, cfg.nu, cfg.loss, true);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t) * k);
    x0.head(x.size()) = x;  // warm start: previous prefix plus a zero row
    const auto t0 = clock::now();
    const SolveReport report = minimize_box(std::cref(objective), x0, cfg.solver);
    const double ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    result.corrective_ms.emplace_back(ms);
    x = report.minimizer;
  }
  return result;
}

inline void write_bench_csv(const BenchResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << "round,stagewise_ms,fullycorrective_ms\n";
  for (std::size_t i = 0; i < result.stagewise_ms.size(); ++i) {
    out << (i + 1) << ',' << detail::format_double(result.stagewise_ms[i]) << ',';
    if (i < result.corrective_ms.size() && result.corrective_ms[i]) {
      out << detail::format_double(*result.corrective_ms[i]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json run_bench(const BenchCommand& cmd) {
  const Dataset data = load_data(cmd.data);
  const BenchResult result = run_bench_result(data, cmd.cfg, cmd.fc_cap);
  if (!cmd.out_csv.empty()) write_bench_csv(result, cmd.out_csv);
  double stage_total = 0.0, corrective_total = 0.0;
  bool skipped = false;
  for (double ms : result.stagewise_ms) stage_total += ms;
  for (const auto& ms : result.corrective_ms) {
    if (ms) {
      corrective_total += *ms;
    } else {
      skipped = true;
    }
  }
  nlohmann::json out;
  out["rounds"] = result.stagewise_ms.size();
  out["stagewise_total_ms"] = stage_total;
  out["fullycorrective_total_ms"] = corrective_total;
  out["fullycorrective_skipped"] = skipped;
  if (!cmd.out_csv.empty()) out["csv"] = cmd.out_csv;
  return out;
}

// ---------------------------------------------------------------------------
// path

struct PathCommand {
  DataSpec data;
  int pool_size = 8;
  double step = 0.01;
  int steps = 1000;
  LossKind loss = LossKind::exponential;
  bool compare_l1 = false;
  int grid = 20;
  std::uint64_t seed = 1;
  std::string out_csv;
};

inline nlohmann::json run_path(const PathCommand& cmd) {
  if (cmd.pool_size < 1 || cmd.pool_size > 32) {
    throw DataError("path: pool size must lie in 1..32");
  }
  const Dataset data = load_data(cmd.data);
  std::vector<DecisionStump> pool = make_stump_pool(data, cmd.pool_size);
  const PathTrace trace = epsilon_path(data, pool, cmd.step, cmd.steps, cmd.loss);
  if (!cmd.out_csv.empty()) write_path_csv(trace, cmd.out_csv);

  nlohmann::json out;
  out["pool_size"] = trace.pool.size();
  out["steps"] = cmd.steps;
  out["final_l1_norm"] = trace.l1_norm.empty() ? 0.0 : trace.l1_norm.back();
  if (!cmd.out_csv.empty()) out["csv"] = cmd.out_csv;

  if (cmd.compare_l1) {
    if (cmd.grid < 1) throw DataError("path: grid must be >= 1");
    const double total = static_cast<double>(cmd.steps) * cmd.step;
    std::vector<Eigen::MatrixXd> references;
    std::vector<double> gammas, gaps;
    double max_ratio = 0.0;
    for (int g = 1; g <= cmd.grid; ++g) {
      const double gamma = total * static_cast<double>(g) / cmd.grid;
      const int snap = static_cast<int>(std::lround(gamma / cmd.step)) - 1;
      L1Settings settings;
      settings.seed = cmd.seed + static_cast<std::uint64_t>(g);
      const Eigen::MatrixXd reference =
          l1_constrained(data, trace.pool, gamma, cmd.loss, settings);
      const double gap =
          (trace.snapshots[static_cast<std::size_t>(snap)] - reference)
              .cwiseAbs()
              .maxCoeff();
      gammas.push_back(gamma);
      gaps.push_back(gap);
      references.push_back(reference);
      max_ratio = std::max(max_ratio, gap / gamma);
    }
    if (!cmd.out_csv.empty()) {
      PathTrace ref_trace;
      ref_trace.pool = trace.pool;
      ref_trace.k = trace.k;
      ref_trace.step = total / cmd.grid;
      ref_trace.l1_norm = gammas;
      ref_trace.snapshots = references;
      write_path_csv(ref_trace, cmd.out_csv + ".l1.csv");
      out["l1_csv"] = cmd.out_csv + ".l1.csv";
    }
    out["max_gap_over_gamma"] = max_ratio;
    nlohmann::json per_gamma = nlohmann::json::array();
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      per_gamma.push_back({{"gamma", gammas[i]}, {"inf_norm_gap", gaps[i]}});
    }
    out["comparison"] = per_gamma;
  }
  return out;
}

}  // namespace swboost
