#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dpx/metrics.hpp"
#include "dpx/oracle.hpp"
#include "dpx/problems.hpp"
#include "dpx/training.hpp"

namespace dpx::harness {

struct RunConfig {
  TrainConfig train;
  std::filesystem::path dataset_path;
  std::filesystem::path truth_path;
  std::filesystem::path output_dir = ".";
  int eval_every = 1;
  int threads = 1;
  bool strict_serial = false;  // forces the single-threaded reference path
};

/// Loads a JSON document mirroring RunConfig; absent keys keep defaults.
RunConfig load_run_config(const std::filesystem::path& path);

/// Resolves the worker count: explicit CLI value, else DPX_THREADS, else 1.
int resolve_threads(int cli_value);

struct GenDataArgs {
  std::uint64_t family_seed = 0;
  std::uint64_t data_seed = 1;
  int n = 50;
  int p = 20;
  ProblemMode mode = ProblemMode::ConvexQP;
  int count = 10000;
  double low = -20.0;
  double high = 20.0;
  double split = 0.8;
  std::filesystem::path out;
  std::filesystem::path csv_out;  // optional debug export
};

/// Generates family + instances, writes the DPX1 archive, returns its hash.
std::uint64_t cmd_gen_data(const GenDataArgs& args);

struct OracleArgs {
  std::filesystem::path dataset_path;
  std::filesystem::path out;
  int threads = 1;
  double certify_tol = 1e-5;  // any worse KKT residual aborts with the index
  AlmOptions alm;
};

/// Solves every instance with the classical ALM oracle and stores certified
/// ground truths keyed by the dataset hash.
void cmd_oracle(const OracleArgs& args);

struct TrainOutputs {
  std::filesystem::path model_path;
  std::filesystem::path metrics_path;
};

/// Full training run with per-epoch test-set evaluation appended to the
/// metrics CSV. Refuses a ground-truth archive whose dataset hash mismatches.
TrainOutputs cmd_train(const RunConfig& cfg);

struct EvalArgs {
  std::filesystem::path dataset_path;
  std::filesystem::path truth_path;
  std::filesystem::path model_path;
  double rho = 10.0;  // DeepAlm dual-gap reference weight
  int threads = 1;
  std::filesystem::path csv_out;  // optional
};

/// Evaluates a saved model on the test set; the method is inferred from the
/// model's output width (p -> DeepAlm, inequality_dim + p -> DeepDualAscent).
MetricsRecord cmd_eval(const EvalArgs& args);

struct CheckOptions {
  bool quick = false;
  int threads = 1;
  std::uint64_t seed = 7;
  /// Fault-injection hook used by the test suite: negates the analytic dual
  /// gradient inside the dual-gradcheck so the check must fail.
  bool inject_dual_grad_sign_flip = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Finite-difference and cross-check property suites. Prints one line per
/// check to stdout; returns all results.
std::vector<CheckResult> run_checks(const CheckOptions& opts);

/// Convenience: true iff every check passed.
bool cmd_check(const CheckOptions& opts);

}  // namespace dpx::harness
