#pragma once

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "dpx/inner_solver.hpp"
#include "dpx/problems.hpp"

namespace dpx {

/// Reference primal/dual optimum for one instance. `feasible` records whether
/// the solver certified convergence.
struct GroundTruth {
  Eigen::VectorXd x_star;
  Eigen::VectorXd nu_star;
  Eigen::VectorXd lambda_star;
  double f_star = 0.0;
  double d_star = 0.0;
  double kkt_residual = 0.0;
  bool feasible = false;
};

/// Stepsize bound for projected dual ascent: 0.9 / ||J (2Q)^-1 J'||_2 with
/// J the stacked constraint Jacobian, estimated by power iteration.
double pda_default_alpha(const ProblemFamily& family);

/// Fixed-step projected gradient ascent on the dual:
///   x^k   = argmin_x L(x, lambda^k, nu^k)      (closed form, ConvexQP)
///   nu^k+1     = nu^k + alpha h(x^k)
///   lambda^k+1 = [lambda^k + alpha g(x^k)]_+
/// Stops when max(||h||_inf, ||[g]_+||_inf, max |lambda_i g_i|) <= tol.
/// A non-finite dual value raises NumericalError (divergence); hitting the
/// iteration cap returns feasible = false.
GroundTruth projected_dual_ascent(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  double alpha, std::int64_t max_iters = 2'000'000,
                                  double tol = 1e-9);

struct AlmOptions {
  double rho0 = 10.0;
  double gamma = 2.0;  // per-outer growth, run-to-convergence schedule
  double rho_max = 1e8;
  int max_outer = 80;
  double eq_tol = 1e-9;  // ||h||_2 at exit
  BoxSolveConfig inner;  // oracle-grade defaults (tol 1e-8)
  /// The final subproblem is re-polished to this tolerance (best effort) so
  /// active bounds are identified sharply before multiplier recovery.
  double polish_grad_tol = 1e-10;
  double active_tol = 1e-8;  // bound-activity threshold for lambda* recovery
  int multistart = 8;        // NonconvexSin: cold start + seeded random box points
  std::uint64_t start_seed = 0;
};

/// LANCELOT-style iterations: box-constrained inner solve, then the printed
/// multiplier step nu <- nu + rho h(x). On exit nu* is the stationarity-
/// consistent estimate nu + 2 rho h(x*) at the final subproblem (the
/// multiplier for which x* is box-stationary), lambda* is recovered from
/// [grad f + A'nu*]_+ on the active bounds, and d* evaluates the dual
/// function at (lambda*, nu*). Nonconvex instances run `multistart` times
/// and keep the converged run with the lowest objective.
GroundTruth classical_alm(const ProblemFamily& family, const Eigen::VectorXd& c,
                          const AlmOptions& opts = {});

/// First-order optimality certificate: max over stationarity
/// ||grad f + A'nu + (dg/dx)'lambda||_inf, equality and box residuals,
/// negative-lambda violation, and complementarity |lambda_i g_i|.
double kkt_check(const ProblemFamily& family, const Eigen::VectorXd& c,
                 const GroundTruth& gt);

/// DPXG1 archive: ground truths keyed by dataset fingerprint + instance index.
struct GroundTruthArchive {
  std::uint64_t dataset_hash = 0;
  int n = 0;
  int p = 0;
  std::vector<std::pair<std::int64_t, GroundTruth>> entries;

  std::unordered_map<std::int64_t, const GroundTruth*> index_map() const;
};

void save_ground_truth(const GroundTruthArchive& archive,
                       const std::filesystem::path& path);
GroundTruthArchive load_ground_truth(const std::filesystem::path& path);

}  // namespace dpx
