#include "dpx/inner_solver.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

namespace dpx {

namespace {

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;  // 1 / (y's)
};

// Standard two-loop recursion; initial Hessian gamma*I from the newest pair.
Eigen::VectorXd two_loop_direction(const std::deque<CurvaturePair>& history,
                                   const Eigen::VectorXd& grad) {
  Eigen::VectorXd q = -grad;
  if (history.empty()) return q;

  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  const auto& last = history.back();
  const double gamma = last.s.dot(last.y) / last.y.squaredNorm();
  q *= gamma;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return q;
}

struct Accepted {
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
  double value;
};

}  // namespace

Eigen::VectorXd project_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  if (x.size() != lower.size() || x.size() != upper.size()) {
    throw std::invalid_argument("project_box: dimension mismatch");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("project_box: crossed bounds");
  }
  return x.cwiseMax(lower).cwiseMin(upper);
}

SolveReport minimize_box(const FunctionAndGradient& fg, const Eigen::VectorXd& x0,
                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         const BoxSolveConfig& cfg) {
  if (cfg.memory < 1 || cfg.max_iters < 1 || cfg.grad_tol <= 0.0) {
    throw std::invalid_argument("minimize_box: invalid config");
  }
  if (!x0.allFinite()) throw std::invalid_argument("minimize_box: x0 not finite");

  Eigen::VectorXd x = project_box(x0, lower, upper);
  Eigen::VectorXd grad(x.size());
  double value = fg(x, grad);
  if (!std::isfinite(value) || !grad.allFinite()) {
    throw NumericalError("minimize_box: non-finite objective or gradient at start");
  }
  if (cfg.observer) cfg.observer(x);

  // Projects a trial step and backtracks until the Armijo condition
  //   f(x+) <= f(x) + c * grad'(x+ - x)
  // holds with grad'(x+ - x) < 0. Returns nullopt if the direction is
  // unusable at every trial step.
  auto line_search = [&](const Eigen::VectorXd& dir) -> std::optional<Accepted> {
    double step = 1.0;
    for (int ls = 0; ls < cfg.max_line_search; ++ls, step *= cfg.backtrack_factor) {
      Eigen::VectorXd x_try = project_box(x + step * dir, lower, upper);
      const Eigen::VectorXd dx = x_try - x;
      if (dx.isZero(0.0)) return std::nullopt;
      const double slope = grad.dot(dx);
      if (slope >= 0.0) continue;
      Eigen::VectorXd grad_try(x.size());
      const double value_try = fg(x_try, grad_try);
      if (!std::isfinite(value_try) || !grad_try.allFinite()) {
        throw NumericalError("minimize_box: non-finite objective or gradient");
      }
      if (value_try <= value + cfg.armijo_c * slope) {
        return Accepted{std::move(x_try), std::move(grad_try), value_try};
      }
    }
    return std::nullopt;
  };

  std::deque<CurvaturePair> history;
  SolveReport report;
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    const double pg_norm =
        (x - project_box(x - grad, lower, upper)).lpNorm<Eigen::Infinity>();
    if (pg_norm <= cfg.grad_tol) {
      report.converged = true;
      break;
    }

    std::optional<Accepted> next = line_search(two_loop_direction(history, grad));
    if (!next && !history.empty()) {
      next = line_search(-grad);  // projected steepest descent fallback
    }
    if (!next) break;  // stalled: no usable descent direction at this point

    const Eigen::VectorXd s = next->x - x;
    const Eigen::VectorXd y = next->grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      history.push_back({s, y, 1.0 / sy});
      if (history.size() > static_cast<std::size_t>(cfg.memory)) history.pop_front();
    } else {
      history.clear();
    }

    x = std::move(next->x);
    grad = std::move(next->grad);
    value = next->value;
    if (cfg.observer) cfg.observer(x);
  }

  report.x = std::move(x);
  report.iterations = iter;
  report.final_projected_grad_norm =
      (report.x - project_box(report.x - grad, lower, upper)).lpNorm<Eigen::Infinity>();
  report.objective_value = value;
  if (!report.converged) {
    report.converged = report.final_projected_grad_norm <= cfg.grad_tol;
  }
  return report;
}

SolveReport minimize_unconstrained(const FunctionAndGradient& fg,
                                   const Eigen::VectorXd& x0,
                                   const BoxSolveConfig& cfg) {
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(x0.size(), -inf);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(x0.size(), inf);
  return minimize_box(fg, x0, lower, upper, cfg);
}

}  // namespace dpx
