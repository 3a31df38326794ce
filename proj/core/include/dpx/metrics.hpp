#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpx/lagrangian.hpp"
#include "dpx/neural.hpp"
#include "dpx/oracle.hpp"
#include "dpx/problems.hpp"

namespace dpx {

struct InstanceMetrics {
  double dual_gap = 0.0;            // d(lambda*, nu*) - d(lambda^, nu^)
  double primal_objective = 0.0;    // f(x^)
  double optimal_objective = 0.0;   // f(x*), reference line
  double eq_residual = 0.0;         // ||h(x^)||_2
  double ineq_residual = 0.0;       // ||[g(x^)]_+||_2; exactly 0 under DeepAlm
  double solution_residual = 0.0;   // ||x^ - x*||_2
};

struct MetricsRecord {
  int epoch = 0;
  double dual_gap_mean = 0.0, dual_gap_std = 0.0;
  double primal_obj_mean = 0.0, primal_obj_std = 0.0;
  double optimal_obj_mean = 0.0;
  double eq_res_mean = 0.0, eq_res_std = 0.0;
  double ineq_res_mean = 0.0, ineq_res_std = 0.0;
  double sol_res_mean = 0.0, sol_res_std = 0.0;
};

struct EvalOptions {
  ProxyMethod method = ProxyMethod::DeepDualAscent;
  /// DeepAlm: penalty weight of the epoch under evaluation. Its dual gap is
  /// measured on the box-augmented dual at this rho, with the oracle's nu*
  /// re-evaluated under the same rho.
  double rho = 10.0;
  BoxSolveConfig inner;  // oracle-grade tolerance by default
  const Eigen::VectorXd* warm_proxy = nullptr;      // warm start for the x^ solve
  const Eigen::VectorXd* warm_reference = nullptr;  // warm start for the nu* solve
  Eigen::VectorXd* out_proxy_x = nullptr;           // receives x^ when non-null
  Eigen::VectorXd* out_reference_x = nullptr;       // receives the nu* minimizer
};

/// Runs the model on one instance (eval-mode forward), recovers the primal
/// estimate at oracle-grade tolerance, and computes the five metrics against
/// the precomputed ground truth.
InstanceMetrics evaluate_instance(const ProblemFamily& family, const Eigen::VectorXd& c,
                                  const MlpModel& model, const EvalOptions& opts,
                                  const GroundTruth& gt);

/// Arithmetic mean and population standard deviation per metric.
MetricsRecord aggregate(const std::vector<InstanceMetrics>& records, int epoch);

/// Stable CSV schema (v1); column order is part of the format contract.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& record);

}  // namespace dpx
