#include "dpx/neural.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "dpx/binio.hpp"
#include "dpx/inner_solver.hpp"  // NumericalError

namespace dpx {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int hidden_count(const MlpModel& model) { return model.num_layers() - 1; }

}  // namespace

MlpModel init_xavier(std::uint64_t seed, const std::vector<int>& dims,
                     bool use_batchnorm) {
  require(dims.size() >= 2, "init_xavier: need at least one layer");
  for (int d : dims) require(d >= 1, "init_xavier: dimensions must be positive");

  std::mt19937_64 rng(seed);
  MlpModel model;
  model.use_batchnorm = use_batchnorm;
  const int layers = static_cast<int>(dims.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(fan_in, fan_out);
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) w(r, c) = dist(rng);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    if (use_batchnorm && l + 1 < layers) {
      BatchNormState bn;
      bn.gamma = Eigen::VectorXd::Ones(fan_out);
      bn.beta = Eigen::VectorXd::Zero(fan_out);
      bn.running_mean = Eigen::VectorXd::Zero(fan_out);
      bn.running_var = Eigen::VectorXd::Ones(fan_out);
      model.batchnorm.push_back(std::move(bn));
    }
  }
  return model;
}

MlpModel make_experiment_mlp(std::uint64_t seed, int input_dim, int output_dim,
                             int hidden_width) {
  return init_xavier(
      seed, {input_dim, hidden_width, hidden_width, hidden_width, hidden_width, output_dim},
      /*use_batchnorm=*/true);
}

Eigen::MatrixXd forward(MlpModel& model, const Eigen::MatrixXd& batch, bool train_mode,
                        ForwardCache* cache) {
  require(model.num_layers() >= 1, "forward: empty model");
  require(batch.cols() == model.input_dim(), "forward: batch width mismatch");
  const Eigen::Index b = batch.rows();
  if (train_mode && b < 2) {
    throw std::invalid_argument("forward: train mode needs a batch of at least 2");
  }

  if (cache) {
    cache->layers.assign(static_cast<std::size_t>(model.num_layers()), {});
    cache->train_mode = train_mode;
    cache->batch_size = b;
  }

  Eigen::MatrixXd activ = batch;
  for (int l = 0; l < model.num_layers(); ++l) {
    const bool hidden = l < hidden_count(model);
    if (cache) cache->layers[l].input = activ;

    Eigen::MatrixXd z =
        (activ * model.weights[l]).rowwise() + model.biases[l].transpose();

    if (hidden && model.use_batchnorm) {
      BatchNormState& bn = model.batchnorm[l];
      Eigen::VectorXd mean, inv_std;
      if (train_mode) {
        mean = z.colwise().mean();
        const Eigen::MatrixXd centered = z.rowwise() - mean.transpose();
        const Eigen::VectorXd var_biased =
            centered.array().square().colwise().mean();
        inv_std = (var_biased.array() + model.bn_eps).sqrt().inverse();
        // Running stats track the unbiased variance (momentum update).
        const double correction = static_cast<double>(b) / static_cast<double>(b - 1);
        bn.running_mean =
            (1.0 - model.bn_momentum) * bn.running_mean + model.bn_momentum * mean;
        bn.running_var = (1.0 - model.bn_momentum) * bn.running_var +
                         model.bn_momentum * (correction * var_biased);
      } else {
        mean = bn.running_mean;
        inv_std = (bn.running_var.array() + model.bn_eps).sqrt().inverse();
      }
      Eigen::MatrixXd normalized =
          (z.rowwise() - mean.transpose()).array().rowwise() *
          inv_std.transpose().array();
      z = (normalized.array().rowwise() * bn.gamma.transpose().array()).matrix();
      z.rowwise() += bn.beta.transpose();
      if (cache) {
        cache->layers[l].normalized = std::move(normalized);
        cache->layers[l].inv_std = std::move(inv_std);
      }
    }

    if (hidden) {
      if (cache) cache->layers[l].pre_act = z;
      activ = z.cwiseMax(0.0);
    } else {
      activ = std::move(z);
    }
  }

  if (!activ.allFinite()) {
    throw NumericalError("forward: non-finite activations in network output");
  }
  return activ;
}

Eigen::MatrixXd eval_forward(const MlpModel& model, const Eigen::MatrixXd& batch) {
  // Eval mode leaves the model untouched; cast away constness for the shared
  // implementation.
  return forward(const_cast<MlpModel&>(model), batch, /*train_mode=*/false);
}

DualHeadOutput relu_clamp_head(const Eigen::MatrixXd& raw, int lambda_dim) {
  require(lambda_dim >= 0 && lambda_dim <= raw.cols(), "relu_clamp_head: bad split");
  DualHeadOutput out;
  out.lambda = raw.leftCols(lambda_dim).cwiseMax(0.0);
  out.nu = raw.rightCols(raw.cols() - lambda_dim);
  return out;
}

Eigen::MatrixXd head_backward(const Eigen::MatrixXd& raw, int lambda_dim,
                              const Eigen::MatrixXd& grad_lambda,
                              const Eigen::MatrixXd& grad_nu) {
  require(lambda_dim == grad_lambda.cols() &&
              raw.cols() - lambda_dim == grad_nu.cols() &&
              raw.rows() == grad_lambda.rows() && raw.rows() == grad_nu.rows(),
          "head_backward: shape mismatch");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  // Clamped coordinates (raw < 0) pass no gradient; the boundary raw == 0
  // passes it, so multipliers sitting at zero can still move upward.
  out.leftCols(lambda_dim) =
      (raw.leftCols(lambda_dim).array() >= 0.0).cast<double>() * grad_lambda.array();
  out.rightCols(grad_nu.cols()) = grad_nu;
  return out;
}

ParamGrads ParamGrads::zeros_like(const MlpModel& model) {
  ParamGrads g;
  for (const auto& w : model.weights) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  for (const auto& b : model.biases) {
    g.biases.emplace_back(Eigen::VectorXd::Zero(b.size()));
  }
  for (const auto& bn : model.batchnorm) {
    g.gamma.emplace_back(Eigen::VectorXd::Zero(bn.gamma.size()));
    g.beta.emplace_back(Eigen::VectorXd::Zero(bn.beta.size()));
  }
  return g;
}

ParamGrads backward(const MlpModel& model, const ForwardCache& cache,
                    const Eigen::MatrixXd& output_grad) {
  require(static_cast<int>(cache.layers.size()) == model.num_layers(),
          "backward: cache does not match model");
  require(output_grad.rows() == cache.batch_size &&
              output_grad.cols() == model.output_dim(),
          "backward: output_grad shape mismatch");

  ParamGrads grads = ParamGrads::zeros_like(model);
  const double b = static_cast<double>(cache.batch_size);

  Eigen::MatrixXd delta = output_grad;  // gradient w.r.t. current layer output
  for (int l = model.num_layers() - 1; l >= 0; --l) {
    const LayerCache& layer = cache.layers[l];
    const bool hidden = l < hidden_count(model);

    if (hidden) {
      delta = (layer.pre_act.array() > 0.0).cast<double>() * delta.array();
      if (model.use_batchnorm) {
        const BatchNormState& bn = model.batchnorm[l];
        grads.beta[l] = delta.colwise().sum();
        grads.gamma[l] = (delta.array() * layer.normalized.array()).colwise().sum();
        Eigen::MatrixXd dxhat =
            delta.array().rowwise() * bn.gamma.transpose().array();
        if (cache.train_mode) {
          // Through the batch statistics:
          // dz = inv_std/B * (B*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))
          const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
          const Eigen::RowVectorXd sum_dxhat_xhat =
              (dxhat.array() * layer.normalized.array()).colwise().sum();
          Eigen::MatrixXd dz = b * dxhat;
          dz.rowwise() -= sum_dxhat;
          dz -= (layer.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
          dz.array().rowwise() *= (layer.inv_std.transpose().array() / b);
          delta = std::move(dz);
        } else {
          delta = (dxhat.array().rowwise() * layer.inv_std.transpose().array()).matrix();
        }
      }
    }

    grads.weights[l] = layer.input.transpose() * delta;
    grads.biases[l] = delta.colwise().sum();
    if (l > 0) delta = (delta * model.weights[l].transpose()).eval();
  }
  return grads;
}

OptimizerState OptimizerState::sgd(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::Sgd;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::adam(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::Adam;
  s.learning_rate = learning_rate;
  return s;
}

namespace {

template <typename Tensor>
void adam_update(Tensor& param, Tensor& m, Tensor& v, const Tensor& g,
                 const OptimizerState& s, double sign, double bc1, double bc2) {
  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = (s.beta2 * v.array() + (1.0 - s.beta2) * g.array().square()).matrix();
  param.array() += sign * s.learning_rate * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + s.epsilon);
}

}  // namespace

void step(MlpModel& model, OptimizerState& state, const ParamGrads& grads, bool ascent) {
  require(grads.weights.size() == model.weights.size() &&
              grads.biases.size() == model.biases.size(),
          "step: gradient shapes do not match model");
  if (state.learning_rate <= 0.0) throw std::invalid_argument("step: learning_rate > 0");
  const double sign = ascent ? 1.0 : -1.0;

  if (state.kind == OptimizerKind::Sgd) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      model.weights[l] += sign * state.learning_rate * grads.weights[l];
      model.biases[l] += sign * state.learning_rate * grads.biases[l];
    }
    for (std::size_t l = 0; l < model.batchnorm.size(); ++l) {
      model.batchnorm[l].gamma += sign * state.learning_rate * grads.gamma[l];
      model.batchnorm[l].beta += sign * state.learning_rate * grads.beta[l];
    }
    return;
  }

  if (state.m.weights.empty()) {
    state.m = ParamGrads::zeros_like(model);
    state.v = ParamGrads::zeros_like(model);
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    adam_update(model.weights[l], state.m.weights[l], state.v.weights[l],
                grads.weights[l], state, sign, bc1, bc2);
    adam_update(model.biases[l], state.m.biases[l], state.v.biases[l], grads.biases[l],
                state, sign, bc1, bc2);
  }
  for (std::size_t l = 0; l < model.batchnorm.size(); ++l) {
    adam_update(model.batchnorm[l].gamma, state.m.gamma[l], state.v.gamma[l],
                grads.gamma[l], state, sign, bc1, bc2);
    adam_update(model.batchnorm[l].beta, state.m.beta[l], state.v.beta[l],
                grads.beta[l], state, sign, bc1, bc2);
  }
}

namespace {
constexpr std::string_view kModelMagic = "DPXM1";
constexpr std::uint32_t kModelVersion = 1;
}  // namespace

void save_model(const MlpModel& model, std::ostream& os) {
  binio::write_magic(os, kModelMagic);
  binio::write_u32(os, kModelVersion);
  binio::write_u32(os, model.use_batchnorm ? 1u : 0u);
  binio::write_f64(os, model.bn_momentum);
  binio::write_f64(os, model.bn_eps);
  binio::write_u32(os, static_cast<std::uint32_t>(model.num_layers()));
  for (const auto& w : model.weights) binio::write_u64(os, static_cast<std::uint64_t>(w.rows()));
  binio::write_u64(os, static_cast<std::uint64_t>(model.weights.back().cols()));
  for (int l = 0; l < model.num_layers(); ++l) {
    binio::write_matrix(os, model.weights[l]);
    binio::write_vector(os, model.biases[l]);
  }
  binio::write_u32(os, static_cast<std::uint32_t>(model.batchnorm.size()));
  for (const auto& bn : model.batchnorm) {
    binio::write_vector(os, bn.gamma);
    binio::write_vector(os, bn.beta);
    binio::write_vector(os, bn.running_mean);
    binio::write_vector(os, bn.running_var);
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw binio::ArchiveError("cannot open for writing: " + path.string());
  save_model(model, os);
}

MlpModel load_model(std::istream& is) {
  binio::expect_magic(is, kModelMagic);
  if (binio::read_u32(is) != kModelVersion) {
    throw binio::ArchiveError("unsupported model version");
  }
  MlpModel model;
  model.use_batchnorm = binio::read_u32(is) != 0;
  model.bn_momentum = binio::read_f64(is);
  model.bn_eps = binio::read_f64(is);
  const auto layers = binio::read_u32(is);
  if (layers == 0 || layers > 64) throw binio::ArchiveError("implausible layer count");
  std::vector<std::uint64_t> manifest(layers + 1);
  for (auto& d : manifest) d = binio::read_u64(is);
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w = binio::read_matrix(is);
    Eigen::VectorXd b = binio::read_vector(is);
    if (static_cast<std::uint64_t>(w.rows()) != manifest[l] ||
        static_cast<std::uint64_t>(w.cols()) != manifest[l + 1] ||
        b.size() != w.cols()) {
      throw binio::ArchiveError("model manifest mismatch");
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
  }
  const auto bn_count = binio::read_u32(is);
  if (model.use_batchnorm &&
      bn_count != static_cast<std::uint32_t>(model.num_layers() - 1)) {
    throw binio::ArchiveError("model manifest mismatch: batch-norm layer count");
  }
  for (std::uint32_t l = 0; l < bn_count; ++l) {
    BatchNormState bn;
    bn.gamma = binio::read_vector(is);
    bn.beta = binio::read_vector(is);
    bn.running_mean = binio::read_vector(is);
    bn.running_var = binio::read_vector(is);
    if (bn.gamma.size() != model.weights[l].cols()) {
      throw binio::ArchiveError("model manifest mismatch: batch-norm width");
    }
    model.batchnorm.push_back(std::move(bn));
  }
  return model;
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw binio::ArchiveError("cannot open model: " + path.string());
  return load_model(is);
}

}  // namespace dpx
