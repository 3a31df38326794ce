#include "dpx/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dpx/parallel.hpp"

namespace dpx {

TrainConfig TrainConfig::dda_defaults() {
  TrainConfig cfg;
  cfg.method = ProxyMethod::DeepDualAscent;
  cfg.optimizer = OptimizerKind::Adam;
  cfg.learning_rate = 5e-4;
  return cfg;
}

TrainConfig TrainConfig::dalm_defaults() {
  TrainConfig cfg;
  cfg.method = ProxyMethod::DeepAlm;
  cfg.optimizer = OptimizerKind::Sgd;
  cfg.learning_rate = 1e-5;
  return cfg;
}

MlpDualPredictor::MlpDualPredictor(MlpModel& model, OptimizerState& optimizer,
                                   int lambda_dim)
    : model_(model), optimizer_(optimizer), lambda_dim_(lambda_dim) {
  if (lambda_dim < 0 || lambda_dim > model.output_dim()) {
    throw std::invalid_argument("MlpDualPredictor: lambda_dim out of range");
  }
}

void MlpDualPredictor::predict(const std::vector<std::int64_t>& indices,
                               const Eigen::MatrixXd& inputs, Eigen::MatrixXd& lambda,
                               Eigen::MatrixXd& nu) {
  (void)indices;
  raw_ = forward(model_, inputs, /*train_mode=*/true, &cache_);
  DualHeadOutput head = relu_clamp_head(raw_, lambda_dim_);
  lambda = std::move(head.lambda);
  nu = std::move(head.nu);
}

void MlpDualPredictor::apply_ascent(const std::vector<std::int64_t>& indices,
                                    const Eigen::MatrixXd& grad_lambda,
                                    const Eigen::MatrixXd& grad_nu) {
  (void)indices;
  // Per-sample parameter gradients are averaged over the batch: scaling the
  // output gradient by 1/B is equivalent since backprop is linear in it.
  const double scale = 1.0 / static_cast<double>(raw_.rows());
  const Eigen::MatrixXd output_grad =
      head_backward(raw_, lambda_dim_, scale * grad_lambda, scale * grad_nu);
  const ParamGrads grads = backward(model_, cache_, output_grad);
  step(model_, optimizer_, grads, /*ascent=*/true);
}

TableDualPredictor::TableDualPredictor(int lambda_dim, int nu_dim, double stepsize)
    : lambda_dim_(lambda_dim), nu_dim_(nu_dim), stepsize_(stepsize) {}

DualEstimate& TableDualPredictor::slot(std::int64_t index) {
  auto it = table_.find(index);
  if (it == table_.end()) {
    it = table_
             .emplace(index, DualEstimate{Eigen::VectorXd::Zero(lambda_dim_),
                                          Eigen::VectorXd::Zero(nu_dim_)})
             .first;
  }
  return it->second;
}

const DualEstimate& TableDualPredictor::duals(std::int64_t index) { return slot(index); }

void TableDualPredictor::predict(const std::vector<std::int64_t>& indices,
                                 const Eigen::MatrixXd& inputs, Eigen::MatrixXd& lambda,
                                 Eigen::MatrixXd& nu) {
  (void)inputs;
  lambda.resize(static_cast<Eigen::Index>(indices.size()), lambda_dim_);
  nu.resize(static_cast<Eigen::Index>(indices.size()), nu_dim_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const DualEstimate& dual = slot(indices[i]);
    lambda.row(static_cast<Eigen::Index>(i)) = dual.lambda.transpose();
    nu.row(static_cast<Eigen::Index>(i)) = dual.nu.transpose();
  }
}

void TableDualPredictor::apply_ascent(const std::vector<std::int64_t>& indices,
                                      const Eigen::MatrixXd& grad_lambda,
                                      const Eigen::MatrixXd& grad_nu) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    DualEstimate& dual = slot(indices[i]);
    const auto row = static_cast<Eigen::Index>(i);
    dual.lambda =
        (dual.lambda + stepsize_ * grad_lambda.row(row).transpose()).cwiseMax(0.0);
    dual.nu += stepsize_ * grad_nu.row(row).transpose();
  }
}

namespace {

void validate_config(const TrainConfig& cfg) {
  if (cfg.gamma < 1.0) throw std::invalid_argument("TrainConfig: gamma >= 1 required");
  if (cfg.rho0 <= 0.0) throw std::invalid_argument("TrainConfig: rho0 > 0 required");
  if (cfg.batch_size < 2) {
    throw std::invalid_argument("TrainConfig: batch_size >= 2 required (batch norm)");
  }
  if (cfg.epochs < 0) throw std::invalid_argument("TrainConfig: epochs >= 0 required");
  if (cfg.learning_rate < 0.0) {
    throw std::invalid_argument("TrainConfig: learning_rate >= 0 required");
  }
}

// Splits [0, count) into batches of cfg.batch_size; a trailing remainder of 1
// is folded into the previous batch so train-mode batch norm always sees >= 2.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count,
                                                              int batch_size) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  const auto bs = static_cast<std::size_t>(batch_size);
  std::size_t begin = 0;
  while (begin < count) {
    std::size_t end = std::min(begin + bs, count);
    if (count - end == 1) end = count;
    ranges.emplace_back(begin, end);
    begin = end;
  }
  return ranges;
}

struct BatchView {
  std::vector<std::int64_t> indices;
  Eigen::MatrixXd inputs;  // B x n
};

BatchView make_batch(const ProblemFamily& family,
                     const std::vector<ProblemInstance>& order, std::size_t begin,
                     std::size_t end) {
  BatchView batch;
  const auto b = static_cast<Eigen::Index>(end - begin);
  batch.indices.reserve(static_cast<std::size_t>(b));
  batch.inputs.resize(b, family.n);
  for (std::size_t i = begin; i < end; ++i) {
    batch.indices.push_back(order[i].index);
    batch.inputs.row(static_cast<Eigen::Index>(i - begin)) = order[i].c.transpose();
  }
  return batch;
}

}  // namespace

EpochStats train_dda_epoch(const ProblemFamily& family,
                           const std::vector<ProblemInstance>& order,
                           DualPredictor& predictor, const TrainConfig& cfg) {
  validate_config(cfg);
  if (family.mode != ProblemMode::ConvexQP) {
    throw std::invalid_argument("train_dda_epoch: ConvexQP families only");
  }

  EpochStats stats;
  double dual_sum = 0.0;
  double grad_sum = 0.0;
  const int m = family.inequality_dim();

  for (const auto& [begin, end] : batch_ranges(order.size(), cfg.batch_size)) {
    const BatchView batch = make_batch(family, order, begin, end);
    const auto b = static_cast<Eigen::Index>(end - begin);

    Eigen::MatrixXd lambda, nu;
    predictor.predict(batch.indices, batch.inputs, lambda, nu);

    Eigen::MatrixXd grad_lambda(b, m), grad_nu(b, family.p);
    Eigen::VectorXd dual_values(b);
    parallel_for(static_cast<std::size_t>(b), cfg.threads, [&](std::size_t i) {
      const auto row = static_cast<Eigen::Index>(i);
      const DualEstimate dual{lambda.row(row).transpose(), nu.row(row).transpose()};
      const Eigen::VectorXd c = batch.inputs.row(row).transpose();
      const DualFunctionResult dfr = dual_function(family, c, dual);
      const auto [g, h] = dual_gradients(family, c, dfr.recovery);
      grad_lambda.row(row) = g.transpose();
      grad_nu.row(row) = h.transpose();
      dual_values[row] = dfr.value;
    });

    if (!dual_values.allFinite()) {
      throw NumericalError("train_dda_epoch: non-finite dual value; aborting epoch");
    }
    for (Eigen::Index i = 0; i < b; ++i) {
      dual_sum += dual_values[i];
      grad_sum += std::sqrt(grad_lambda.row(i).squaredNorm() +
                            grad_nu.row(i).squaredNorm());
    }
    stats.samples += static_cast<int>(b);

    predictor.apply_ascent(batch.indices, grad_lambda, grad_nu);
  }

  if (stats.samples > 0) {
    stats.mean_dual_value = dual_sum / stats.samples;
    stats.mean_grad_norm = grad_sum / stats.samples;
  }
  return stats;
}

EpochStats train_dalm_epoch(const ProblemFamily& family,
                            const std::vector<ProblemInstance>& order,
                            DualPredictor& predictor, const TrainConfig& cfg,
                            WarmStartStore& store, double rho) {
  validate_config(cfg);
  if (rho <= 0.0) throw std::invalid_argument("train_dalm_epoch: rho > 0 required");

  EpochStats stats;
  stats.inner_iterations.reserve(order.size());
  double dual_sum = 0.0;
  double grad_sum = 0.0;
  long iter_sum = 0;

  for (const auto& [begin, end] : batch_ranges(order.size(), cfg.batch_size)) {
    const BatchView batch = make_batch(family, order, begin, end);
    const auto b = static_cast<Eigen::Index>(end - begin);

    Eigen::MatrixXd lambda, nu;
    predictor.predict(batch.indices, batch.inputs, lambda, nu);

    // Warm starts are read before the parallel section; writes happen at the
    // barrier below.
    std::vector<const Eigen::VectorXd*> warm(static_cast<std::size_t>(b));
    for (Eigen::Index i = 0; i < b; ++i) {
      warm[static_cast<std::size_t>(i)] = store.find(batch.indices[static_cast<std::size_t>(i)]);
    }

    Eigen::MatrixXd grad_nu(b, family.p);
    Eigen::MatrixXd grad_lambda(b, 0);
    std::vector<Eigen::VectorXd> solutions(static_cast<std::size_t>(b));
    std::vector<int> iters(static_cast<std::size_t>(b));
    std::vector<unsigned char> converged(static_cast<std::size_t>(b));
    Eigen::VectorXd dual_values(b);

    parallel_for(static_cast<std::size_t>(b), cfg.threads, [&](std::size_t i) {
      const auto row = static_cast<Eigen::Index>(i);
      const Eigen::VectorXd c = batch.inputs.row(row).transpose();
      const Eigen::VectorXd nu_hat = nu.row(row).transpose();
      const PrimalRecovery rec =
          primal_recovery_box(family, c, nu_hat, rho, warm[i], cfg.inner);
      grad_nu.row(row) = equality_residual(family, rec.x).transpose();
      dual_values[row] = augmented_lagrangian_value(family, c, rec.x, nu_hat, rho);
      iters[i] = rec.inner_iterations;
      converged[i] = rec.converged ? 1 : 0;
      solutions[i] = rec.x;
    });

    if (!dual_values.allFinite()) {
      throw NumericalError("train_dalm_epoch: non-finite dual value; aborting epoch");
    }
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      store.put(batch.indices[idx], std::move(solutions[idx]));
      dual_sum += dual_values[i];
      grad_sum += grad_nu.row(i).norm();
      iter_sum += iters[idx];
      stats.inner_iterations.push_back(iters[idx]);
      if (!converged[idx]) ++stats.inner_nonconverged;
    }
    stats.samples += static_cast<int>(b);

    predictor.apply_ascent(batch.indices, grad_lambda, grad_nu);
  }

  if (stats.samples > 0) {
    stats.mean_dual_value = dual_sum / stats.samples;
    stats.mean_grad_norm = grad_sum / stats.samples;
    stats.mean_inner_iterations = static_cast<double>(iter_sum) / stats.samples;
  }
  return stats;
}

double rho_update(double rho, const TrainConfig& cfg) {
  if (rho <= 0.0) throw std::invalid_argument("rho_update: rho > 0 required");
  return std::min(rho * cfg.gamma, cfg.rho_max);
}

TrainResult run_training(const Dataset& dataset, const TrainConfig& cfg,
                         const EvalHook& eval_hook) {
  validate_config(cfg);
  const ProblemFamily& family = dataset.family;
  const int lambda_dim =
      cfg.method == ProxyMethod::DeepDualAscent ? family.inequality_dim() : 0;
  const int out_dim = lambda_dim + family.p;

  TrainResult result;
  result.model = make_experiment_mlp(cfg.seed, family.n, out_dim, cfg.hidden_width);
  OptimizerState optimizer = cfg.optimizer == OptimizerKind::Adam
                                 ? OptimizerState::adam(cfg.learning_rate)
                                 : OptimizerState::sgd(cfg.learning_rate);
  MlpDualPredictor predictor(result.model, optimizer, lambda_dim);
  WarmStartStore store(dataset.seed);

  std::vector<ProblemInstance> order = dataset.train;
  double rho = cfg.rho0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Dedicated shuffle stream, one fresh permutation per epoch.
    std::mt19937_64 shuffle_rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL *
                                            (static_cast<std::uint64_t>(epoch) + 1)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochStats stats;
    if (cfg.method == ProxyMethod::DeepDualAscent) {
      stats = train_dda_epoch(family, order, predictor, cfg);
    } else {
      stats = train_dalm_epoch(family, order, predictor, cfg, store, rho);
    }

    if (eval_hook) {
      if (auto record = eval_hook(epoch, result.model, rho, stats)) {
        result.history.push_back(*record);
      }
    }
    rho = rho_update(rho, cfg);
  }
  return result;
}

}  // namespace dpx
