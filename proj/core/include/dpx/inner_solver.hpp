#pragma once

#include <functional>
#include <stdexcept>

#include <Eigen/Core>

namespace dpx {

/// Thrown when an objective or gradient evaluates to a non-finite value.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluates f(x), writes the gradient into `grad`, returns the value.
/// Must be a pure function of x.
using FunctionAndGradient =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BoxSolveConfig {
  int memory = 10;         // quasi-Newton history length
  int max_iters = 500;
  double grad_tol = 1e-8;  // infinity norm of the projected gradient
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_line_search = 60;
  /// Roundoff slack for the sufficient-decrease test, as a multiple of
  /// (1 + |f|). Without it the search stalls once true per-step decrements
  /// drop below the objective's floating-point measurement noise, which
  /// happens well before grad_tol on stiff penalty subproblems.
  double f_noise_rel = 1e-14;
  /// Called with every accepted iterate (after projection). Test hook.
  std::function<void(const Eigen::VectorXd&)> observer;
};

/// Config preset for inner solves during training, where the subproblem
/// need not be solved to full accuracy.
inline BoxSolveConfig training_solve_config() {
  BoxSolveConfig cfg;
  cfg.max_iters = 100;
  cfg.grad_tol = 1e-6;
  return cfg;
}

struct SolveReport {
  Eigen::VectorXd x;
  int iterations = 0;
  double final_projected_grad_norm = 0.0;
  bool converged = false;
  double objective_value = 0.0;
};

/// Componentwise clamp onto [lower, upper]; idempotent.
Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

/// Projected L-BFGS with Armijo backtracking. Candidate steps are projected
/// onto the box before evaluation, so every iterate (and the result) lies in
/// [lower, upper] exactly. Falls back to projected steepest descent whenever
/// the quasi-Newton direction fails the line search.
SolveReport minimize_box(const FunctionAndGradient& fg, const Eigen::VectorXd& x0,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const BoxSolveConfig& cfg = {});

/// minimize_box with infinite bounds.
SolveReport minimize_unconstrained(const FunctionAndGradient& fg,
                                   const Eigen::VectorXd& x0,
                                   const BoxSolveConfig& cfg = {});

}  // namespace dpx
