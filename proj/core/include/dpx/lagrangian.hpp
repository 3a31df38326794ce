#pragma once

#include <utility>

#include <Eigen/Core>

#include "dpx/inner_solver.hpp"
#include "dpx/problems.hpp"

namespace dpx {

/// Multiplier estimate for one instance: lambda for the inequality rows of
/// inequality_residual (nonnegative), nu for the equalities.
struct DualEstimate {
  Eigen::VectorXd lambda;
  Eigen::VectorXd nu;

  /// Clamps the lambda part onto the nonnegative orthant.
  static DualEstimate clamped(Eigen::VectorXd lambda, Eigen::VectorXd nu);
};

struct PrimalRecovery {
  Eigen::VectorXd x;
  int inner_iterations = 0;
  double inner_grad_norm = 0.0;
  bool converged = true;
};

enum class ProxyMethod { DeepDualAscent, DeepAlm };

/// L(x, lambda, nu) = f(x) + lambda'g(x) + nu'h(x).
double lagrangian_value(const ProblemFamily& family, const Eigen::VectorXd& c,
                        const Eigen::VectorXd& x, const DualEstimate& dual);

/// Equality-penalized Lagrangian f(x) + nu'h(x) + rho*||h(x)||^2. The box
/// indicator of the box-constrained form lives in the solver bounds and is
/// never evaluated here.
double augmented_lagrangian_value(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                  double rho);

/// Right-hand side of the stationarity system 2Q x = -(c + A'nu + (dg/dx)'lambda).
Eigen::VectorXd stationarity_rhs(const ProblemFamily& family, const Eigen::VectorXd& c,
                                 const DualEstimate& dual);

struct DualFunctionResult {
  double value = 0.0;
  PrimalRecovery recovery;
};

/// d(lambda, nu) = min_x L(x, lambda, nu) together with the minimizer.
/// ConvexQP solves the stationarity system in closed form (Cholesky of 2Q);
/// NonconvexSin minimizes iteratively from `warm_start` (origin when null)
/// and flags non-convergence in the recovery rather than failing.
DualFunctionResult dual_function(const ProblemFamily& family, const Eigen::VectorXd& c,
                                 const DualEstimate& dual,
                                 const Eigen::VectorXd* warm_start = nullptr,
                                 const BoxSolveConfig& inner = {});

/// (grad_lambda d, grad_nu d) = (g(x*), h(x*)) at the recovered minimizer.
std::pair<Eigen::VectorXd, Eigen::VectorXd> dual_gradients(const ProblemFamily& family,
                                                           const Eigen::VectorXd& c,
                                                           const PrimalRecovery& recovery);

/// argmin over the box of the equality-augmented Lagrangian at (nu, rho).
/// Bounds hold exactly in the result. Warm starts outside the box are clamped.
PrimalRecovery primal_recovery_box(const ProblemFamily& family, const Eigen::VectorXd& c,
                                   const Eigen::VectorXd& nu, double rho,
                                   const Eigen::VectorXd* warm_start = nullptr,
                                   const BoxSolveConfig& inner = {});

/// Closed-form minimizer of the unboxed augmented Lagrangian for ConvexQP:
/// (2Q + 2 rho A'A) x = -(c + A'nu) + 2 rho A'b.
Eigen::VectorXd augmented_minimizer_qp(const ProblemFamily& family, const Eigen::VectorXd& c,
                                       const Eigen::VectorXd& nu, double rho);

struct RecoveryOptions {
  ProxyMethod method = ProxyMethod::DeepDualAscent;
  double rho = 10.0;  // DeepAlm path
  const Eigen::VectorXd* warm_start = nullptr;
  BoxSolveConfig inner;
};

/// The operator D_c: maps a dual estimate to its primal recovery, choosing the
/// closed-form path (DeepDualAscent on ConvexQP) or the box solve (DeepAlm).
Eigen::VectorXd recover_primal_proxy(const ProblemFamily& family, const Eigen::VectorXd& c,
                                     const DualEstimate& dual,
                                     const RecoveryOptions& opts = {});

}  // namespace dpx
