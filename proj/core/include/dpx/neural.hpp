#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace dpx {

struct BatchNormState {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

/// Feedforward ReLU network. Each hidden layer is affine -> batchnorm ->
/// ReLU; the output layer is affine only. Batches are row-major (B x dim).
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // [in x out] per layer
  std::vector<Eigen::VectorXd> biases;
  std::vector<BatchNormState> batchnorm;  // one per hidden layer when enabled
  bool use_batchnorm = true;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().rows()); }
  int output_dim() const { return static_cast<int>(weights.back().cols()); }
};

/// Weights ~ U[-sqrt(6/(fan_in+fan_out)), +...], biases zero, batch-norm
/// gain 1 / shift 0 / running stats (0, 1). Deterministic per seed.
MlpModel init_xavier(std::uint64_t seed, const std::vector<int>& dims,
                     bool use_batchnorm = true);

/// The experiment architecture: five affine layers with a common hidden width.
MlpModel make_experiment_mlp(std::uint64_t seed, int input_dim, int output_dim,
                             int hidden_width = 200);

struct LayerCache {
  Eigen::MatrixXd input;       // B x in
  Eigen::MatrixXd normalized;  // B x out, batch-norm x-hat (empty when unused)
  Eigen::VectorXd inv_std;     // 1/sqrt(var + eps) used by the forward pass
  Eigen::MatrixXd pre_act;     // B x out, value entering ReLU (hidden layers)
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  bool train_mode = false;
  Eigen::Index batch_size = 0;
};

/// Runs the network on a batch. Train mode normalizes with batch statistics
/// and folds them into the running estimates (momentum update, unbiased
/// variance); it therefore mutates the model and needs B >= 2. Eval mode uses
/// the running statistics and is a pure function of (model, batch).
Eigen::MatrixXd forward(MlpModel& model, const Eigen::MatrixXd& batch, bool train_mode,
                        ForwardCache* cache = nullptr);

/// Eval-mode forward on an immutable snapshot (pure function of model, batch).
Eigen::MatrixXd eval_forward(const MlpModel& model, const Eigen::MatrixXd& batch);

struct DualHeadOutput {
  Eigen::MatrixXd lambda;  // B x lambda_dim, clamped nonnegative
  Eigen::MatrixXd nu;      // B x (out - lambda_dim)
};

/// Splits raw network output into (lambda, nu) and clamps lambda at zero.
DualHeadOutput relu_clamp_head(const Eigen::MatrixXd& raw, int lambda_dim);

/// Reassembles an output gradient for backward(), zeroing the lambda part
/// wherever the raw pre-clamp value was negative.
Eigen::MatrixXd head_backward(const Eigen::MatrixXd& raw, int lambda_dim,
                              const Eigen::MatrixXd& grad_lambda,
                              const Eigen::MatrixXd& grad_nu);

struct ParamGrads {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> beta;

  static ParamGrads zeros_like(const MlpModel& model);
};

/// Exact reverse-mode gradients of sum(output_grad .* output) w.r.t. every
/// trainable parameter, differentiating through batch statistics in train
/// mode. The cache must come from a forward() call on the same model.
ParamGrads backward(const MlpModel& model, const ForwardCache& cache,
                    const Eigen::MatrixXd& output_grad);

enum class OptimizerKind { Sgd, Adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Sgd;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t t = 0;
  ParamGrads m;  // Adam first moment (sized lazily)
  ParamGrads v;  // Adam second moment

  static OptimizerState sgd(double learning_rate);
  static OptimizerState adam(double learning_rate);
};

/// One optimizer update; `ascent` flips the sign (gradient ascent on the dual
/// objective). Adam uses the standard bias-corrected moments.
void step(MlpModel& model, OptimizerState& state, const ParamGrads& grads, bool ascent);

/// DPXM1 model archive; parameter and running-stat round trips are bitwise.
void save_model(const MlpModel& model, std::ostream& os);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(std::istream& is);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace dpx
