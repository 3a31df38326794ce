#include "dpx/oracle.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "dpx/binio.hpp"
#include "dpx/lagrangian.hpp"

namespace dpx {

namespace {

// Applies the stacked constraint Jacobian J = [dg/dx; A] and its transpose.
Eigen::VectorXd apply_jt(const ProblemFamily& family, const Eigen::VectorXd& z) {
  const int m = family.inequality_dim();
  return inequality_jacobian_t(family, z.head(m)) +
         family.A.transpose() * z.tail(family.p);
}

Eigen::VectorXd apply_j(const ProblemFamily& family, const Eigen::VectorXd& x) {
  const int m = family.inequality_dim();
  Eigen::VectorXd out(m + family.p);
  // Rows of dg/dx are -e_i for finite lower bounds, +e_i for finite uppers.
  int k = 0;
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.lower[i])) out[k++] = -x[i];
  }
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.upper[i])) out[k++] = x[i];
  }
  out.tail(family.p) = family.A * x;
  return out;
}

}  // namespace

double pda_default_alpha(const ProblemFamily& family) {
  if (family.mode != ProblemMode::ConvexQP) {
    throw std::invalid_argument("pda_default_alpha: ConvexQP only");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(2.0 * family.Q);
  const int dim = family.inequality_dim() + family.p;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(dim).normalized();
  double norm_estimate = 1.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = apply_j(family, llt.solve(apply_jt(family, v)));
    norm_estimate = w.norm();
    if (norm_estimate == 0.0) break;
    v = w / norm_estimate;
  }
  return 0.9 / std::max(norm_estimate, 1e-12);
}

GroundTruth projected_dual_ascent(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  double alpha, std::int64_t max_iters, double tol) {
  if (family.mode != ProblemMode::ConvexQP) {
    throw std::invalid_argument("projected_dual_ascent: ConvexQP only");
  }
  if (alpha <= 0.0 || tol <= 0.0) {
    throw std::invalid_argument("projected_dual_ascent: alpha and tol must be positive");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(2.0 * family.Q);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("projected_dual_ascent: 2Q not positive definite");
  }

  const int m = family.inequality_dim();
  DualEstimate dual{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(family.p)};
  Eigen::VectorXd x(family.n), g(m), h(family.p);
  bool converged = false;

  for (std::int64_t it = 0; it < max_iters; ++it) {
    x = llt.solve(stationarity_rhs(family, c, dual));
    if (!x.allFinite()) {
      throw NumericalError(
          "projected_dual_ascent: diverged (non-finite primal iterate at step " +
          std::to_string(it) + ")");
    }
    g = inequality_residual(family, x);
    h = equality_residual(family, x);

    const double crit =
        std::max({h.lpNorm<Eigen::Infinity>(), g.cwiseMax(0.0).lpNorm<Eigen::Infinity>(),
                  (dual.lambda.array() * g.array()).abs().maxCoeff()});
    if (crit <= tol) {
      converged = true;
      break;
    }
    dual.nu += alpha * h;
    dual.lambda = (dual.lambda + alpha * g).cwiseMax(0.0);
  }

  GroundTruth gt;
  gt.x_star = x;
  gt.nu_star = dual.nu;
  gt.lambda_star = dual.lambda;
  gt.f_star = objective(family, c, x);
  gt.d_star = lagrangian_value(family, c, x, dual);
  if (!std::isfinite(gt.d_star)) {
    throw NumericalError("projected_dual_ascent: diverged (non-finite dual value)");
  }
  gt.feasible = converged;
  gt.kkt_residual = kkt_check(family, c, gt);
  return gt;
}

namespace {

GroundTruth alm_single_start(const ProblemFamily& family, const Eigen::VectorXd& c,
                             const AlmOptions& opts, const Eigen::VectorXd& start) {
  Eigen::VectorXd x = project_box(start, family.lower, family.upper);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(family.p);
  double rho = opts.rho0;
  bool converged = false;
  Eigen::VectorXd nu_solve = nu;  // multiplier used in the latest inner solve
  double rho_solve = rho;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    nu_solve = nu;
    rho_solve = rho;
    const PrimalRecovery recovery = primal_recovery_box(family, c, nu, rho, &x, opts.inner);
    x = recovery.x;
    const Eigen::VectorXd h = equality_residual(family, x);
    if (h.norm() <= opts.eq_tol && recovery.converged) {
      converged = true;
      break;
    }
    nu += rho * h;
    rho = std::min(rho * opts.gamma, opts.rho_max);
  }

  // Polish the final subproblem so active bounds separate sharply from
  // interior coordinates (best effort; the tolerance may sit below the
  // rho-amplified gradient noise floor).
  {
    BoxSolveConfig polish = opts.inner;
    polish.grad_tol = opts.polish_grad_tol;
    polish.max_iters = std::max(200, opts.inner.max_iters);
    const PrimalRecovery polished =
        primal_recovery_box(family, c, nu_solve, rho_solve, &x, polish);
    x = polished.x;
  }

  const Eigen::VectorXd h = equality_residual(family, x);
  // Multiplier for which x is box-stationary at the final subproblem.
  const Eigen::VectorXd nu_star = nu_solve + 2.0 * rho_solve * h;

  // lambda* from stationarity, restricted to active bounds. Row layout
  // matches inequality_residual.
  const Eigen::VectorXd grad_l = objective_grad(family, c, x) + family.A.transpose() * nu_star;
  const double act_tol = opts.active_tol;
  const int m = family.inequality_dim();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  int k = 0;
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.lower[i])) {
      if (x[i] - family.lower[i] <= act_tol) lambda[k] = std::max(grad_l[i], 0.0);
      ++k;
    }
  }
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.upper[i])) {
      if (family.upper[i] - x[i] <= act_tol) lambda[k] = std::max(-grad_l[i], 0.0);
      ++k;
    }
  }

  GroundTruth gt;
  gt.x_star = x;
  gt.nu_star = nu_star;
  gt.lambda_star = lambda;
  gt.f_star = objective(family, c, x);
  const DualEstimate dual{lambda, nu_star};
  gt.d_star = dual_function(family, c, dual, &gt.x_star, opts.inner).value;
  gt.feasible = converged;
  gt.kkt_residual = kkt_check(family, c, gt);
  return gt;
}

}  // namespace

GroundTruth classical_alm(const ProblemFamily& family, const Eigen::VectorXd& c,
                          const AlmOptions& opts) {
  if (opts.rho0 <= 0.0 || opts.gamma < 1.0 || opts.max_outer < 1) {
    throw std::invalid_argument("classical_alm: invalid options");
  }

  const Eigen::VectorXd cold = Eigen::VectorXd::Zero(family.n);
  if (family.mode == ProblemMode::ConvexQP || opts.multistart <= 1) {
    return alm_single_start(family, c, opts, cold);
  }

  // Nonconvex: multi-start, keep the converged run with the lowest objective.
  std::mt19937_64 rng(opts.start_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GroundTruth best;
  bool have_best = false;
  for (int s = 0; s < opts.multistart; ++s) {
    Eigen::VectorXd start = cold;
    if (s > 0) {
      for (int i = 0; i < family.n; ++i) {
        const double lo = std::isfinite(family.lower[i]) ? family.lower[i] : -1.0;
        const double hi =
            std::isfinite(family.upper[i]) ? family.upper[i] : lo + 1.0;
        start[i] = lo + (hi - lo) * unit(rng);
      }
    }
    GroundTruth run = alm_single_start(family, c, opts, start);
    const bool better = !have_best ||
                        (run.feasible && !best.feasible) ||
                        (run.feasible == best.feasible && run.f_star < best.f_star);
    if (better) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

double kkt_check(const ProblemFamily& family, const Eigen::VectorXd& c,
                 const GroundTruth& gt) {
  const Eigen::VectorXd stat = objective_grad(family, c, gt.x_star) +
                               family.A.transpose() * gt.nu_star +
                               inequality_jacobian_t(family, gt.lambda_star);
  const Eigen::VectorXd h = equality_residual(family, gt.x_star);
  const Eigen::VectorXd g = inequality_residual(family, gt.x_star);

  double worst = stat.lpNorm<Eigen::Infinity>();
  worst = std::max(worst, h.lpNorm<Eigen::Infinity>());
  if (g.size() > 0) {
    worst = std::max(worst, g.cwiseMax(0.0).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, std::max(0.0, -gt.lambda_star.minCoeff()));
    worst = std::max(worst, (gt.lambda_star.array() * g.array()).abs().maxCoeff());
  }
  return worst;
}

std::unordered_map<std::int64_t, const GroundTruth*> GroundTruthArchive::index_map()
    const {
  std::unordered_map<std::int64_t, const GroundTruth*> map;
  map.reserve(entries.size());
  for (const auto& [index, gt] : entries) map.emplace(index, &gt);
  return map;
}

namespace {
constexpr std::string_view kTruthMagic = "DPXG1";
constexpr std::uint32_t kTruthVersion = 1;
}  // namespace

void save_ground_truth(const GroundTruthArchive& archive,
                       const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw binio::ArchiveError("cannot open for writing: " + path.string());
  binio::write_magic(os, kTruthMagic);
  binio::write_u32(os, kTruthVersion);
  binio::write_u64(os, archive.dataset_hash);
  binio::write_u64(os, static_cast<std::uint64_t>(archive.n));
  binio::write_u64(os, static_cast<std::uint64_t>(archive.p));
  binio::write_u64(os, archive.entries.size());
  for (const auto& [index, gt] : archive.entries) {
    binio::write_i64(os, index);
    binio::write_vector(os, gt.x_star);
    binio::write_vector(os, gt.nu_star);
    binio::write_vector(os, gt.lambda_star);
    binio::write_f64(os, gt.f_star);
    binio::write_f64(os, gt.d_star);
    binio::write_f64(os, gt.kkt_residual);
    binio::write_u32(os, gt.feasible ? 1u : 0u);
  }
}

GroundTruthArchive load_ground_truth(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw binio::ArchiveError("cannot open ground truth: " + path.string());
  binio::expect_magic(is, kTruthMagic);
  if (binio::read_u32(is) != kTruthVersion) {
    throw binio::ArchiveError("unsupported ground-truth version");
  }
  GroundTruthArchive archive;
  archive.dataset_hash = binio::read_u64(is);
  archive.n = static_cast<int>(binio::read_u64(is));
  archive.p = static_cast<int>(binio::read_u64(is));
  const auto count = binio::read_u64(is);
  if (count > (1ULL << 32)) throw binio::ArchiveError("implausible entry count");
  archive.entries.resize(count);
  for (auto& [index, gt] : archive.entries) {
    index = binio::read_i64(is);
    gt.x_star = binio::read_vector(is);
    gt.nu_star = binio::read_vector(is);
    gt.lambda_star = binio::read_vector(is);
    gt.f_star = binio::read_f64(is);
    gt.d_star = binio::read_f64(is);
    gt.kkt_residual = binio::read_f64(is);
    gt.feasible = binio::read_u32(is) != 0;
  }
  return archive;
}

}  // namespace dpx
