#include "dpx/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dpx {

InstanceMetrics evaluate_instance(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  const MlpModel& model, const EvalOptions& opts,
                                  const GroundTruth& gt) {
  detail::check_dims(family, c, "evaluate_instance(c)");

  const Eigen::MatrixXd raw = eval_forward(model, c.transpose());
  InstanceMetrics out;
  out.optimal_objective = gt.f_star;

  Eigen::VectorXd x_hat;
  if (opts.method == ProxyMethod::DeepDualAscent) {
    const int m = family.inequality_dim();
    if (raw.cols() != m + family.p) {
      throw std::invalid_argument("evaluate_instance: model output width mismatch");
    }
    const DualHeadOutput head = relu_clamp_head(raw, m);
    const DualEstimate dual{head.lambda.row(0).transpose(), head.nu.row(0).transpose()};
    const DualFunctionResult dfr = dual_function(family, c, dual, nullptr, opts.inner);
    x_hat = dfr.recovery.x;
    out.dual_gap = gt.d_star - dfr.value;
    out.ineq_residual = inequality_residual(family, x_hat).cwiseMax(0.0).norm();
  } else {
    if (raw.cols() != family.p) {
      throw std::invalid_argument("evaluate_instance: model output width mismatch");
    }
    const Eigen::VectorXd nu_hat = raw.row(0).transpose();
    const PrimalRecovery rec =
        primal_recovery_box(family, c, nu_hat, opts.rho, opts.warm_proxy, opts.inner);
    x_hat = rec.x;
    const double d_hat = augmented_lagrangian_value(family, c, x_hat, nu_hat, opts.rho);

    // Reference dual value: the oracle's nu* under the same epoch rho.
    const PrimalRecovery ref = primal_recovery_box(family, c, gt.nu_star, opts.rho,
                                                   opts.warm_reference, opts.inner);
    const double d_ref =
        augmented_lagrangian_value(family, c, ref.x, gt.nu_star, opts.rho);
    out.dual_gap = d_ref - d_hat;
    out.ineq_residual = 0.0;  // box solve keeps the bounds exactly
    if (opts.out_reference_x) *opts.out_reference_x = ref.x;
  }

  out.primal_objective = objective(family, c, x_hat);
  out.eq_residual = equality_residual(family, x_hat).norm();
  out.solution_residual = (x_hat - gt.x_star).norm();
  if (opts.out_proxy_x) *opts.out_proxy_x = std::move(x_hat);
  return out;
}

namespace {

// Welford accumulation; std is the population deviation (divide by N).
class MeanStd {
 public:
  void add(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
  }
  double mean() const { return mean_; }
  double std() const {
    return count_ > 0 ? std::sqrt(m2_ / static_cast<double>(count_)) : 0.0;
  }

 private:
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MetricsRecord aggregate(const std::vector<InstanceMetrics>& records, int epoch) {
  if (records.size() < 2) {
    throw std::invalid_argument("aggregate: need at least 2 instances");
  }
  MeanStd gap, pobj, oobj, eq, ineq, sol;
  for (const auto& r : records) {
    gap.add(r.dual_gap);
    pobj.add(r.primal_objective);
    oobj.add(r.optimal_objective);
    eq.add(r.eq_residual);
    ineq.add(r.ineq_residual);
    sol.add(r.solution_residual);
  }
  MetricsRecord rec;
  rec.epoch = epoch;
  rec.dual_gap_mean = gap.mean();
  rec.dual_gap_std = gap.std();
  rec.primal_obj_mean = pobj.mean();
  rec.primal_obj_std = pobj.std();
  rec.optimal_obj_mean = oobj.mean();
  rec.eq_res_mean = eq.mean();
  rec.eq_res_std = eq.std();
  rec.ineq_res_mean = ineq.mean();
  rec.ineq_res_std = ineq.std();
  rec.sol_res_mean = sol.mean();
  rec.sol_res_std = sol.std();
  return rec;
}

std::string metrics_csv_header() {
  return "epoch,dual_gap_mean,dual_gap_std,primal_obj_mean,primal_obj_std,"
         "optimal_obj_mean,eq_res_mean,eq_res_std,ineq_res_mean,ineq_res_std,"
         "sol_res_mean,sol_res_std";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.epoch);
  for (double v : {r.dual_gap_mean, r.dual_gap_std, r.primal_obj_mean, r.primal_obj_std,
                   r.optimal_obj_mean, r.eq_res_mean, r.eq_res_std, r.ineq_res_mean,
                   r.ineq_res_std, r.sol_res_mean, r.sol_res_std}) {
    row += ',';
    row += format_g17(v);
  }
  return row;
}

}  // namespace dpx
