// Command-line front end: train/predict/eval plus the sweep, bench, and
// coefficient-path experiments. All outputs are machine readable (JSON on
// stdout, CSV files on disk). Exit codes: 0 success, 1 user/data error,
// 2 internal/solver error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swboost/swboost.hpp"

namespace {

struct CommonFlags {
  swboost::DataSpec data;
  std::string loss = "exp";
  int rounds = 500;
  double nu = 1e-9;
  double eta = 0.5;
  std::optional<double> kappa;
  double eps = 1e-7;
  std::uint64_t seed = 0;
};

void add_data_flags(CLI::App* cmd, swboost::DataSpec& spec) {
  cmd->add_option("--data", spec.path, "dataset file")->required();
  cmd->add_option("--format", spec.format, "input format")
      ->check(CLI::IsMember({"libsvm", "csv"}))
      ->capture_default_str();
  cmd->add_option("--label-col", spec.label_col, "label column (csv)")
      ->capture_default_str();
}

void add_train_flags(CLI::App* cmd, CommonFlags& flags) {
  add_data_flags(cmd, flags.data);
  cmd->add_option("--loss", flags.loss, "loss kind")
      ->check(CLI::IsMember({"exp", "log"}))
      ->capture_default_str();
  cmd->add_option("--rounds", flags.rounds, "boosting iteration budget")
      ->capture_default_str();
  cmd->add_option("--nu", flags.nu, "l1 regularization weight")
      ->capture_default_str();
  cmd->add_option("--eta", flags.eta, "shrinkage in (0,1]")->capture_default_str();
  cmd->add_option("--kappa", flags.kappa, "per-round coefficient cap");
  cmd->add_option("--eps", flags.eps, "stopping slack")->capture_default_str();
  cmd->add_option("--seed", flags.seed, "random seed")->capture_default_str();
}

swboost::TrainConfig to_config(const CommonFlags& flags) {
  swboost::TrainConfig cfg;
  cfg.loss = swboost::loss_from_name(flags.loss);
  cfg.max_rounds = flags.rounds;
  cfg.nu = flags.nu;
  cfg.eta = flags.eta;
  cfg.kappa = flags.kappa;
  cfg.stop_slack = flags.eps;
  cfg.seed = flags.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stage-wise multi-class boosting with decision stumps"};
  app.require_subcommand(1);

  // train
  CommonFlags train_flags;
  std::optional<double> train_frac;
  std::optional<int> train_per_class;
  std::string model_out = "model.json";
  std::string trace_out;
  CLI::App* train_cmd = app.add_subcommand("train", "fit a model");
  add_train_flags(train_cmd, train_flags);
  train_cmd->add_option("--train-frac", train_frac,
                        "hold out a stratified test split");
  train_cmd->add_option("--per-class", train_per_class, "per-class sample cap");
  train_cmd->add_option("--out", model_out, "model output path")
      ->capture_default_str();
  train_cmd->add_option("--trace", trace_out, "per-round trace CSV path");

  // predict
  std::string predict_model;
  swboost::DataSpec predict_data;
  CLI::App* predict_cmd = app.add_subcommand("predict", "label a dataset");
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  add_data_flags(predict_cmd, predict_data);

  // eval
  std::string eval_model;
  swboost::DataSpec eval_data;
  CLI::App* eval_cmd = app.add_subcommand("eval", "error rate on a dataset");
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  add_data_flags(eval_cmd, eval_data);

  // sweep
  CommonFlags sweep_flags;
  std::string sweep_param = "nu";
  std::vector<double> sweep_values;
  int sweep_repeats = 1;
  std::optional<int> sweep_per_class;
  double sweep_frac = 0.75;
  std::string sweep_out = "sweep.csv";
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "repeat training over a parameter grid");
  add_train_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", sweep_param, "swept parameter")
      ->check(CLI::IsMember({"nu", "eta"}))
      ->capture_default_str();
  sweep_cmd->add_option("--values", sweep_values, "swept values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--repeats", sweep_repeats, "independent repeats")
      ->capture_default_str();
  sweep_cmd->add_option("--per-class", sweep_per_class, "per-class sample cap");
  sweep_cmd->add_option("--train-frac", sweep_frac, "train fraction")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "results CSV path")
      ->capture_default_str();

  // bench
  CommonFlags bench_flags;
  int bench_cap = 5000;
  std::string bench_out = "bench.csv";
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "per-round coefficient-solve timings, stage-wise vs fully corrective");
  add_train_flags(bench_cmd, bench_flags);
  bench_cmd->add_option("--fc-cap", bench_cap,
                        "skip fully-corrective solves once t*k exceeds this")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "timing CSV path")
      ->capture_default_str();

  // path
  swboost::PathCommand path_cmd_spec;
  std::string path_loss = "exp";
  std::string path_out = "path.csv";
  CLI::App* path_cmd = app.add_subcommand("path", "epsilon-step coefficient path");
  add_data_flags(path_cmd, path_cmd_spec.data);
  path_cmd->add_option("--pool", path_cmd_spec.pool_size, "stump pool size (<= 32)")
      ->capture_default_str();
  path_cmd->add_option("--steps", path_cmd_spec.steps, "number of steps")
      ->capture_default_str();
  path_cmd->add_option("--step", path_cmd_spec.step, "per-step increment")
      ->capture_default_str();
  path_cmd->add_option("--loss", path_loss, "loss kind")
      ->check(CLI::IsMember({"exp", "log"}))
      ->capture_default_str();
  path_cmd->add_flag("--compare-l1", path_cmd_spec.compare_l1,
                     "solve the l1-constrained reference at matched norms");
  path_cmd->add_option("--grid", path_cmd_spec.grid, "matched-norm grid size")
      ->capture_default_str();
  path_cmd->add_option("--seed", path_cmd_spec.seed, "random seed")
      ->capture_default_str();
  path_cmd->add_option("--out", path_out, "path CSV output")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train_cmd->parsed()) {
      swboost::TrainCommand cmd;
      cmd.data = train_flags.data;
      cmd.cfg = to_config(train_flags);
      cmd.train_frac = train_frac;
      cmd.per_class = train_per_class;
      cmd.model_out = model_out;
      cmd.trace_out = trace_out;
      std::cout << swboost::run_train(cmd).dump() << '\n';
    } else if (predict_cmd->parsed()) {
      swboost::run_predict(predict_model, predict_data, std::cout);
    } else if (eval_cmd->parsed()) {
      std::cout << swboost::run_eval(eval_model, eval_data).dump() << '\n';
    } else if (sweep_cmd->parsed()) {
      swboost::SweepCommand cmd;
      cmd.data = sweep_flags.data;
      cmd.base = to_config(sweep_flags);
      cmd.param = sweep_param == "nu" ? swboost::SweepParam::nu
                                      : swboost::SweepParam::eta;
      cmd.values = sweep_values;
      cmd.repeats = sweep_repeats;
      cmd.seed_base = sweep_flags.seed;
      cmd.per_class = sweep_per_class;
      cmd.train_frac = sweep_frac;
      cmd.out_csv = sweep_out;
      std::cout << swboost::run_sweep(cmd).dump() << '\n';
    } else if (bench_cmd->parsed()) {
      swboost::BenchCommand cmd;
      cmd.data = bench_flags.data;
      cmd.cfg = to_config(bench_flags);
      cmd.fc_cap = bench_cap;
      cmd.out_csv = bench_out;
      std::cout << swboost::run_bench(cmd).dump() << '\n';
    } else if (path_cmd->parsed()) {
      path_cmd_spec.loss = swboost::loss_from_name(path_loss);
      path_cmd_spec.out_csv = path_out;
      std::cout << swboost::run_path(path_cmd_spec).dump() << '\n';
    }
  } catch (const swboost::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const swboost::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const swboost::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
