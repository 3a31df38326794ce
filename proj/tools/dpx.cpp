#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dpx/harness.hpp"

namespace {

using dpx::ProblemMode;
using dpx::ProxyMethod;

int run_gen_data(const dpx::harness::GenDataArgs& args) {
  dpx::harness::cmd_gen_data(args);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpx - learned dual-prediction proxy solvers for parametric optimization"};
  app.require_subcommand(1);

  // gen-data ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "Generate a problem family and dataset");
  dpx::harness::GenDataArgs gen_args;
  std::string gen_mode = "qp";
  gen->add_option("--family-seed", gen_args.family_seed, "Family RNG seed");
  gen->add_option("--data-seed", gen_args.data_seed, "Instance RNG seed");
  gen->add_option("--n", gen_args.n, "Primal dimension");
  gen->add_option("--p", gen_args.p, "Equality constraint count");
  gen->add_option("--mode", gen_mode, "Problem mode: qp | sin");
  gen->add_option("--count", gen_args.count, "Number of instances");
  gen->add_option("--low", gen_args.low, "Sampling interval lower end");
  gen->add_option("--high", gen_args.high, "Sampling interval upper end");
  gen->add_option("--split", gen_args.split, "Train fraction");
  gen->add_option("--out", gen_args.out, "Output dataset archive")->required();
  gen->add_option("--dump-csv", gen_args.csv_out, "Optional instance CSV export");

  // oracle ------------------------------------------------------------------
  auto* orc = app.add_subcommand("oracle", "Precompute certified ground truths");
  dpx::harness::OracleArgs orc_args;
  int orc_threads = 0;
  orc->add_option("--dataset", orc_args.dataset_path, "Dataset archive")->required();
  orc->add_option("--out", orc_args.out, "Output ground-truth archive")->required();
  orc->add_option("--threads", orc_threads, "Worker threads (DPX_THREADS fallback)");
  orc->add_option("--inner-iters", orc_args.alm.inner.max_iters, "Inner solver cap");
  orc->add_option("--certify-tol", orc_args.certify_tol, "Max admissible KKT residual");

  // train -------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a proxy model");
  std::string config_path;
  std::optional<std::string> method_str;
  std::optional<int> epochs, batch_size, hidden_width, eval_every, threads, inner_iters;
  std::optional<double> learning_rate, rho0, gamma, rho_max, inner_tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> optimizer_str, dataset_path, truth_path, output_dir;
  bool strict_serial = false;
  train->add_option("--config", config_path, "JSON config mirroring the run options");
  train->add_option("--method", method_str, "dda | dalm");
  train->add_option("--dataset", dataset_path, "Dataset archive");
  train->add_option("--truth", truth_path, "Ground-truth archive");
  train->add_option("--out-dir", output_dir, "Output directory");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--batch", batch_size, "Mini-batch size");
  train->add_option("--lr", learning_rate, "Learning rate");
  train->add_option("--optimizer", optimizer_str, "sgd | adam");
  train->add_option("--rho0", rho0, "Initial penalty weight");
  train->add_option("--gamma", gamma, "Per-epoch penalty growth");
  train->add_option("--rho-max", rho_max, "Penalty cap");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--hidden-width", hidden_width, "Hidden layer width");
  train->add_option("--inner-iters", inner_iters, "Training inner-solve cap");
  train->add_option("--inner-tol", inner_tol, "Training inner-solve tolerance");
  train->add_option("--eval-every", eval_every, "Evaluate every k epochs");
  train->add_option("--threads", threads, "Worker threads (DPX_THREADS fallback)");
  train->add_flag("--strict-serial", strict_serial, "Single-threaded reference mode");

  // eval --------------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Evaluate a saved model on the test set");
  dpx::harness::EvalArgs eval_args;
  int eval_threads = 0;
  ev->add_option("--dataset", eval_args.dataset_path, "Dataset archive")->required();
  ev->add_option("--truth", eval_args.truth_path, "Ground-truth archive")->required();
  ev->add_option("--model", eval_args.model_path, "Model file")->required();
  ev->add_option("--rho", eval_args.rho, "Dual-gap penalty weight (DeepAlm models)");
  ev->add_option("--threads", eval_threads, "Worker threads (DPX_THREADS fallback)");
  ev->add_option("--csv-out", eval_args.csv_out, "Optional CSV output path");

  // check -------------------------------------------------------------------
  auto* chk = app.add_subcommand("check", "Run the property and cross-check suites");
  dpx::harness::CheckOptions chk_opts;
  int chk_threads = 0;
  chk->add_flag("--quick", chk_opts.quick, "Reduced-size suite (< 60 s)");
  chk->add_option("--seed", chk_opts.seed, "Suite RNG seed");
  chk->add_option("--threads", chk_threads, "Worker threads (DPX_THREADS fallback)");
  chk->add_flag("--inject-dual-grad-sign-flip", chk_opts.inject_dual_grad_sign_flip)
      ->group("");  // fault-injection hook for the test suite; hidden

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (gen_mode == "qp") {
        gen_args.mode = ProblemMode::ConvexQP;
      } else if (gen_mode == "sin") {
        gen_args.mode = ProblemMode::NonconvexSin;
      } else {
        throw std::invalid_argument("--mode must be qp or sin");
      }
      return run_gen_data(gen_args);
    }

    if (orc->parsed()) {
      orc_args.threads = dpx::harness::resolve_threads(orc_threads);
      dpx::harness::cmd_oracle(orc_args);
      return 0;
    }

    if (train->parsed()) {
      dpx::harness::RunConfig cfg;
      if (!config_path.empty()) cfg = dpx::harness::load_run_config(config_path);
      if (method_str) {
        cfg.train = *method_str == "dda" ? dpx::TrainConfig::dda_defaults()
                                         : dpx::TrainConfig::dalm_defaults();
        if (*method_str != "dda" && *method_str != "dalm") {
          throw std::invalid_argument("--method must be dda or dalm");
        }
      }
      if (optimizer_str) {
        if (*optimizer_str == "sgd") {
          cfg.train.optimizer = dpx::OptimizerKind::Sgd;
        } else if (*optimizer_str == "adam") {
          cfg.train.optimizer = dpx::OptimizerKind::Adam;
        } else {
          throw std::invalid_argument("--optimizer must be sgd or adam");
        }
      }
      if (epochs) cfg.train.epochs = *epochs;
      if (batch_size) cfg.train.batch_size = *batch_size;
      if (learning_rate) cfg.train.learning_rate = *learning_rate;
      if (rho0) cfg.train.rho0 = *rho0;
      if (gamma) cfg.train.gamma = *gamma;
      if (rho_max) cfg.train.rho_max = *rho_max;
      if (seed) cfg.train.seed = *seed;
      if (hidden_width) cfg.train.hidden_width = *hidden_width;
      if (inner_iters) cfg.train.inner.max_iters = *inner_iters;
      if (inner_tol) cfg.train.inner.grad_tol = *inner_tol;
      if (dataset_path) cfg.dataset_path = *dataset_path;
      if (truth_path) cfg.truth_path = *truth_path;
      if (output_dir) cfg.output_dir = *output_dir;
      if (eval_every) cfg.eval_every = *eval_every;
      if (threads) cfg.threads = *threads;
      if (strict_serial) cfg.strict_serial = true;
      if (cfg.dataset_path.empty() || cfg.truth_path.empty()) {
        throw std::invalid_argument("train requires --dataset and --truth (or a config)");
      }
      const auto outputs = dpx::harness::cmd_train(cfg);
      std::cout << "model " << outputs.model_path.string() << "\nmetrics "
                << outputs.metrics_path.string() << "\n";
      return 0;
    }

    if (ev->parsed()) {
      eval_args.threads = dpx::harness::resolve_threads(eval_threads);
      dpx::harness::cmd_eval(eval_args);
      return 0;
    }

    if (chk->parsed()) {
      chk_opts.threads = dpx::harness::resolve_threads(chk_threads);
      return dpx::harness::cmd_check(chk_opts) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
