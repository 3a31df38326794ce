#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace dpx {

/// Thrown when a random family cannot be produced within the retry budget.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemMode { ConvexQP, NonconvexSin };

/// A parametric problem class: minimize x'Qx + c'x (or x'Qx + c'sin(x))
/// subject to Ax = b and lower <= x <= upper. Instances vary only in c.
/// Immutable after construction; safe to share across threads.
struct ProblemFamily {
  int n = 0;  // primal dimension
  int p = 0;  // number of equality constraints
  Eigen::MatrixXd Q;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd witness;  // x0 used to build b = A x0; feasible by construction
  ProblemMode mode = ProblemMode::ConvexQP;

  /// Number of scalar inequality rows in g(x) <= 0 (finite bounds only).
  int inequality_dim() const;
  bool has_finite_upper() const;
};

struct ProblemInstance {
  Eigen::VectorXd c;
  std::int64_t index = 0;  // stable id, warm-start key
};

struct Dataset {
  ProblemFamily family;
  std::vector<ProblemInstance> train;
  std::vector<ProblemInstance> test;
  std::uint64_t seed = 0;
  double sample_low = 0.0;
  double sample_high = 0.0;
  double split = 0.0;
};

/// Draws Q = (M'M)/n + eps_q*I with M ~ U[0,1], A ~ U[-1,1] (regenerated on
/// rank deficiency), and b = A x0 with x0 ~ U[0,1] so the feasible set is
/// nonempty. Bounds are x >= 0. Identical seeds give identical families.
ProblemFamily generate_family(std::uint64_t seed, int n, int p, ProblemMode mode,
                              double eps_q = 0.1, int max_retries = 32);

/// Samples `count` instances with components i.i.d. U[low, high] and splits
/// them in generation order: the first round(count*split) become training.
Dataset generate_dataset(const ProblemFamily& family, int count, double low,
                         double high, std::uint64_t seed, double split = 0.8);

double objective(const ProblemFamily& family, const Eigen::VectorXd& c,
                 const Eigen::VectorXd& x);
Eigen::VectorXd objective_grad(const ProblemFamily& family, const Eigen::VectorXd& c,
                               const Eigen::VectorXd& x);

/// h(x) = A x - b.
Eigen::VectorXd equality_residual(const ProblemFamily& family, const Eigen::VectorXd& x);

/// g(x) <= 0 in standard form: rows (lower - x) for finite lower bounds,
/// then (x - upper) for finite upper bounds. For the benchmark families
/// (lower = 0, upper = +inf) this reduces to g(x) = -x.
Eigen::VectorXd inequality_residual(const ProblemFamily& family, const Eigen::VectorXd& x);

/// Returns (dg/dx)' * lambda for the row layout of inequality_residual.
Eigen::VectorXd inequality_jacobian_t(const ProblemFamily& family,
                                      const Eigen::VectorXd& lambda);

/// DPX1 archive. Round-trips bitwise.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::uint64_t dataset_hash(const std::filesystem::path& path);

/// Debug CSV of instance parameter vectors (one row per instance).
void export_instances_csv(const Dataset& dataset, const std::filesystem::path& path);

namespace detail {
void check_dims(const ProblemFamily& family, const Eigen::VectorXd& x, const char* what);
}

}  // namespace dpx
