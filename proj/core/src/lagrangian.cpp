#include "dpx/lagrangian.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace dpx {

namespace {

void require_dual_dims(const ProblemFamily& family, const DualEstimate& dual) {
  if (dual.lambda.size() != family.inequality_dim() || dual.nu.size() != family.p) {
    throw std::invalid_argument("dual estimate dimension mismatch");
  }
  if ((dual.lambda.array() < 0.0).any()) {
    throw std::invalid_argument("dual estimate has negative inequality multipliers");
  }
}

FunctionAndGradient augmented_objective(const ProblemFamily& family,
                                        const Eigen::VectorXd& c,
                                        const Eigen::VectorXd& nu, double rho) {
  return [&family, &c, &nu, rho](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const Eigen::VectorXd h = family.A * x - family.b;
    grad = objective_grad(family, c, x) + family.A.transpose() * (nu + 2.0 * rho * h);
    return objective(family, c, x) + nu.dot(h) + rho * h.squaredNorm();
  };
}

}  // namespace

DualEstimate DualEstimate::clamped(Eigen::VectorXd lambda, Eigen::VectorXd nu) {
  lambda = lambda.cwiseMax(0.0);
  return DualEstimate{std::move(lambda), std::move(nu)};
}

double lagrangian_value(const ProblemFamily& family, const Eigen::VectorXd& c,
                        const Eigen::VectorXd& x, const DualEstimate& dual) {
  require_dual_dims(family, dual);
  return objective(family, c, x) + dual.lambda.dot(inequality_residual(family, x)) +
         dual.nu.dot(equality_residual(family, x));
}

double augmented_lagrangian_value(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                  double rho) {
  if (rho <= 0.0) throw std::invalid_argument("augmented_lagrangian_value: rho > 0 required");
  if (nu.size() != family.p) {
    throw std::invalid_argument("augmented_lagrangian_value: nu dimension mismatch");
  }
  const Eigen::VectorXd h = equality_residual(family, x);
  return objective(family, c, x) + nu.dot(h) + rho * h.squaredNorm();
}

Eigen::VectorXd stationarity_rhs(const ProblemFamily& family, const Eigen::VectorXd& c,
                                 const DualEstimate& dual) {
  return -(c + family.A.transpose() * dual.nu + inequality_jacobian_t(family, dual.lambda));
}

DualFunctionResult dual_function(const ProblemFamily& family, const Eigen::VectorXd& c,
                                 const DualEstimate& dual,
                                 const Eigen::VectorXd* warm_start,
                                 const BoxSolveConfig& inner) {
  require_dual_dims(family, dual);
  detail::check_dims(family, c, "dual_function(c)");

  DualFunctionResult result;
  if (family.mode == ProblemMode::ConvexQP) {
    const Eigen::LLT<Eigen::MatrixXd> llt(2.0 * family.Q);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("dual_function: 2Q is not positive definite");
    }
    result.recovery.x = llt.solve(stationarity_rhs(family, c, dual));
    result.recovery.converged = true;
  } else {
    const FunctionAndGradient fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      grad = objective_grad(family, c, x) + family.A.transpose() * dual.nu +
             inequality_jacobian_t(family, dual.lambda);
      return lagrangian_value(family, c, x, dual);
    };
    const Eigen::VectorXd x0 =
        warm_start ? *warm_start : Eigen::VectorXd::Zero(family.n);
    SolveReport report = minimize_unconstrained(fg, x0, inner);
    result.recovery.x = std::move(report.x);
    result.recovery.inner_iterations = report.iterations;
    result.recovery.inner_grad_norm = report.final_projected_grad_norm;
    result.recovery.converged = report.converged;
  }
  result.value = lagrangian_value(family, c, result.recovery.x, dual);
  return result;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> dual_gradients(const ProblemFamily& family,
                                                           const Eigen::VectorXd& c,
                                                           const PrimalRecovery& recovery) {
  (void)c;  // gradients depend on c only through the recovered point
  return {inequality_residual(family, recovery.x), equality_residual(family, recovery.x)};
}

PrimalRecovery primal_recovery_box(const ProblemFamily& family, const Eigen::VectorXd& c,
                                   const Eigen::VectorXd& nu, double rho,
                                   const Eigen::VectorXd* warm_start,
                                   const BoxSolveConfig& inner) {
  if (rho <= 0.0) throw std::invalid_argument("primal_recovery_box: rho > 0 required");
  if (nu.size() != family.p) {
    throw std::invalid_argument("primal_recovery_box: nu dimension mismatch");
  }
  const Eigen::VectorXd x0 = project_box(
      warm_start ? *warm_start : Eigen::VectorXd::Zero(family.n), family.lower,
      family.upper);
  SolveReport report = minimize_box(augmented_objective(family, c, nu, rho), x0,
                                    family.lower, family.upper, inner);
  PrimalRecovery recovery;
  recovery.x = std::move(report.x);
  recovery.inner_iterations = report.iterations;
  recovery.inner_grad_norm = report.final_projected_grad_norm;
  recovery.converged = report.converged;
  return recovery;
}

Eigen::VectorXd augmented_minimizer_qp(const ProblemFamily& family, const Eigen::VectorXd& c,
                                       const Eigen::VectorXd& nu, double rho) {
  if (family.mode != ProblemMode::ConvexQP) {
    throw std::invalid_argument("augmented_minimizer_qp: ConvexQP only");
  }
  if (rho <= 0.0) throw std::invalid_argument("augmented_minimizer_qp: rho > 0 required");
  const Eigen::MatrixXd H =
      2.0 * family.Q + 2.0 * rho * family.A.transpose() * family.A;
  const Eigen::VectorXd rhs =
      -(c + family.A.transpose() * nu) + 2.0 * rho * family.A.transpose() * family.b;
  const Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("augmented_minimizer_qp: system not positive definite");
  }
  return llt.solve(rhs);
}

Eigen::VectorXd recover_primal_proxy(const ProblemFamily& family, const Eigen::VectorXd& c,
                                     const DualEstimate& dual, const RecoveryOptions& opts) {
  if (opts.method == ProxyMethod::DeepAlm) {
    return primal_recovery_box(family, c, dual.nu, opts.rho, opts.warm_start, opts.inner)
        .x;
  }
  if (family.mode != ProblemMode::ConvexQP) {
    throw std::invalid_argument(
        "recover_primal_proxy: the unaugmented dual path supports ConvexQP only");
  }
  return dual_function(family, c, dual, opts.warm_start, opts.inner).recovery.x;
}

}  // namespace dpx
