#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "dpx/lagrangian.hpp"
#include "dpx/metrics.hpp"
#include "dpx/neural.hpp"
#include "dpx/problems.hpp"

namespace dpx {

struct TrainConfig {
  ProxyMethod method = ProxyMethod::DeepAlm;
  int epochs = 200;
  int batch_size = 50;
  double learning_rate = 1e-5;
  OptimizerKind optimizer = OptimizerKind::Sgd;
  double rho0 = 10.0;
  double gamma = 1.05;
  double rho_max = 1e6;
  std::uint64_t seed = 0;
  BoxSolveConfig inner = training_solve_config();
  int hidden_width = 200;
  int threads = 1;  // per-sample work inside a batch; 1 is the reference mode

  /// Adam, learning rate 5e-4.
  static TrainConfig dda_defaults();
  /// SGD, learning rate 1e-5.
  static TrainConfig dalm_defaults();
};

/// Last primal solution per instance index, used to hotstart the next epoch's
/// inner solve. Bound to one family via a tag; reset clears on tag change.
/// Concurrent reads of distinct keys are safe; writes happen at the batch
/// barrier on the training thread.
class WarmStartStore {
 public:
  explicit WarmStartStore(std::uint64_t family_tag = 0) : tag_(family_tag) {}

  void reset(std::uint64_t family_tag) {
    if (family_tag != tag_) {
      map_.clear();
      tag_ = family_tag;
    }
  }
  const Eigen::VectorXd* find(std::int64_t index) const {
    const auto it = map_.find(index);
    return it == map_.end() ? nullptr : &it->second;
  }
  void put(std::int64_t index, Eigen::VectorXd x) { map_[index] = std::move(x); }
  std::size_t size() const { return map_.size(); }
  std::uint64_t tag() const { return tag_; }

 private:
  std::uint64_t tag_;
  std::unordered_map<std::int64_t, Eigen::VectorXd> map_;
};

/// The trainable dual estimator seen by the epoch loops. The MLP-backed
/// implementation is the production path; a table-backed one reproduces the
/// classical method for cross-checks.
class DualPredictor {
 public:
  virtual ~DualPredictor() = default;

  /// Produces feasible duals for a batch; row i corresponds to indices[i].
  /// lambda has width inequality_dim (0 under DeepAlm) and is nonnegative.
  virtual void predict(const std::vector<std::int64_t>& indices,
                       const Eigen::MatrixXd& inputs, Eigen::MatrixXd& lambda,
                       Eigen::MatrixXd& nu) = 0;

  /// One ascent step driven by the per-sample dual-function gradients
  /// (rows align with the preceding predict call).
  virtual void apply_ascent(const std::vector<std::int64_t>& indices,
                            const Eigen::MatrixXd& grad_lambda,
                            const Eigen::MatrixXd& grad_nu) = 0;
};

/// Wraps the MLP: predict = train-mode forward + ReLU clamp head; ascent =
/// backpropagation of the batch-averaged dual gradients + optimizer step.
class MlpDualPredictor : public DualPredictor {
 public:
  MlpDualPredictor(MlpModel& model, OptimizerState& optimizer, int lambda_dim);

  void predict(const std::vector<std::int64_t>& indices, const Eigen::MatrixXd& inputs,
               Eigen::MatrixXd& lambda, Eigen::MatrixXd& nu) override;
  void apply_ascent(const std::vector<std::int64_t>& indices,
                    const Eigen::MatrixXd& grad_lambda,
                    const Eigen::MatrixXd& grad_nu) override;

 private:
  MlpModel& model_;
  OptimizerState& optimizer_;
  int lambda_dim_;
  Eigen::MatrixXd raw_;
  ForwardCache cache_;
};

/// Stores one free dual vector per instance and applies the classical
/// projected update lambda <- [lambda + a g]_+, nu <- nu + a h. With batch
/// size 1 the epoch loop then reproduces Projected Dual Ascent exactly.
class TableDualPredictor : public DualPredictor {
 public:
  TableDualPredictor(int lambda_dim, int nu_dim, double stepsize);

  void predict(const std::vector<std::int64_t>& indices, const Eigen::MatrixXd& inputs,
               Eigen::MatrixXd& lambda, Eigen::MatrixXd& nu) override;
  void apply_ascent(const std::vector<std::int64_t>& indices,
                    const Eigen::MatrixXd& grad_lambda,
                    const Eigen::MatrixXd& grad_nu) override;

  const DualEstimate& duals(std::int64_t index);

 private:
  DualEstimate& slot(std::int64_t index);
  int lambda_dim_;
  int nu_dim_;
  double stepsize_;
  std::unordered_map<std::int64_t, DualEstimate> table_;
};

struct EpochStats {
  double mean_dual_value = 0.0;
  double mean_grad_norm = 0.0;  // per-sample ||(g, h)||_2, averaged
  double mean_inner_iterations = 0.0;
  int inner_nonconverged = 0;
  std::vector<int> inner_iterations;  // per processed sample (DeepAlm)
  int samples = 0;
};

/// One Deep Dual Ascent epoch over `order`: predict (lambda, nu), recover the
/// Lagrangian minimizer in closed form, ascend along (g(x*), h(x*)).
/// ConvexQP families only.
EpochStats train_dda_epoch(const ProblemFamily& family,
                           const std::vector<ProblemInstance>& order,
                           DualPredictor& predictor, const TrainConfig& cfg);

/// One Deep ALM epoch at fixed rho: predict nu, solve the box-constrained
/// augmented subproblem warm-started from the store, ascend along h(x*),
/// write x* back at the batch barrier.
EpochStats train_dalm_epoch(const ProblemFamily& family,
                            const std::vector<ProblemInstance>& order,
                            DualPredictor& predictor, const TrainConfig& cfg,
                            WarmStartStore& store, double rho);

/// min(rho * gamma, rho_max); applied once per epoch.
double rho_update(double rho, const TrainConfig& cfg);

/// Called after every epoch with the epoch index, the model, the epoch's rho,
/// and the epoch stats; a returned record is appended to the history.
using EvalHook = std::function<std::optional<MetricsRecord>(
    int epoch, const MlpModel& model, double rho, const EpochStats& stats)>;

struct TrainResult {
  MlpModel model;
  std::vector<MetricsRecord> history;
};

/// Full training run: builds the five-layer model, shuffles the training set
/// each epoch from a dedicated RNG stream, runs the method's epoch loop, and
/// invokes the hook. Identical (seed, config, dataset) replay the same run.
TrainResult run_training(const Dataset& dataset, const TrainConfig& cfg,
                         const EvalHook& eval_hook = {});

}  // namespace dpx
