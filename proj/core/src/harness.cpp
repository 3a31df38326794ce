#include "dpx/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "dpx/binio.hpp"
#include "dpx/parallel.hpp"

namespace dpx::harness {

namespace {

using nlohmann::json;

ProxyMethod parse_method(const std::string& s) {
  if (s == "dda") return ProxyMethod::DeepDualAscent;
  if (s == "dalm") return ProxyMethod::DeepAlm;
  throw std::invalid_argument("unknown method '" + s + "' (expected dda|dalm)");
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected sgd|adam)");
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  json doc = json::parse(is);

  RunConfig cfg;
  if (doc.contains("method")) {
    cfg.train = doc["method"].get<std::string>() == "dda" ? TrainConfig::dda_defaults()
                                                          : TrainConfig::dalm_defaults();
    cfg.train.method = parse_method(doc["method"].get<std::string>());
  }
  auto opt = [&](const char* key, auto& field) {
    if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
  };
  opt("epochs", cfg.train.epochs);
  opt("batch_size", cfg.train.batch_size);
  opt("learning_rate", cfg.train.learning_rate);
  if (doc.contains("optimizer")) {
    cfg.train.optimizer = parse_optimizer(doc["optimizer"].get<std::string>());
  }
  opt("rho0", cfg.train.rho0);
  opt("gamma", cfg.train.gamma);
  opt("rho_max", cfg.train.rho_max);
  opt("seed", cfg.train.seed);
  opt("hidden_width", cfg.train.hidden_width);
  opt("inner_max_iters", cfg.train.inner.max_iters);
  opt("inner_grad_tol", cfg.train.inner.grad_tol);
  if (doc.contains("dataset")) cfg.dataset_path = doc["dataset"].get<std::string>();
  if (doc.contains("truth")) cfg.truth_path = doc["truth"].get<std::string>();
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  opt("eval_every", cfg.eval_every);
  opt("threads", cfg.threads);
  opt("strict_serial", cfg.strict_serial);
  return cfg;
}

int resolve_threads(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("DPX_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

std::uint64_t cmd_gen_data(const GenDataArgs& args) {
  const ProblemFamily family = generate_family(args.family_seed, args.n, args.p, args.mode);
  const Dataset dataset =
      generate_dataset(family, args.count, args.low, args.high, args.data_seed, args.split);
  save_dataset(dataset, args.out);
  if (!args.csv_out.empty()) export_instances_csv(dataset, args.csv_out);
  const std::uint64_t hash = dataset_hash(args.out);
  std::cout << "dataset " << args.out.string() << " hash " << hash_hex(hash) << " ("
            << dataset.train.size() << " train / " << dataset.test.size() << " test)\n";
  return hash;
}

void cmd_oracle(const OracleArgs& args) {
  const Dataset dataset = load_dataset(args.dataset_path);
  const std::uint64_t hash = dataset_hash(args.dataset_path);

  std::vector<const ProblemInstance*> instances;
  for (const auto& inst : dataset.train) instances.push_back(&inst);
  for (const auto& inst : dataset.test) instances.push_back(&inst);

  GroundTruthArchive archive;
  archive.dataset_hash = hash;
  archive.n = dataset.family.n;
  archive.p = dataset.family.p;
  archive.entries.resize(instances.size());

  parallel_for(instances.size(), args.threads, [&](std::size_t i) {
    const ProblemInstance& inst = *instances[i];
    AlmOptions opts = args.alm;
    // Per-instance deterministic multi-start stream.
    opts.start_seed = dataset.seed ^
                      (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(inst.index) + 1));
    GroundTruth gt = classical_alm(dataset.family, inst.c, opts);
    archive.entries[i] = {inst.index, std::move(gt)};
  });

  for (const auto& [index, gt] : archive.entries) {
    if (gt.kkt_residual > args.certify_tol || !gt.feasible) {
      throw std::runtime_error("oracle certification failed at instance " +
                               std::to_string(index) + " (kkt residual " +
                               std::to_string(gt.kkt_residual) + ")");
    }
  }

  save_ground_truth(archive, args.out);
  std::cout << "ground truth " << args.out.string() << " (" << archive.entries.size()
            << " instances, dataset hash " << hash_hex(hash) << ")\n";
}

namespace {

/// Per-epoch test-set evaluation with persistent warm starts (DeepAlm).
class TestSetEvaluator {
 public:
  TestSetEvaluator(const Dataset& dataset, const GroundTruthArchive& truth,
                   ProxyMethod method, int threads)
      : dataset_(dataset), method_(method), threads_(threads), truth_map_(truth.index_map()) {
    for (const auto& inst : dataset.test) {
      if (truth_map_.find(inst.index) == truth_map_.end()) {
        throw std::runtime_error("missing ground truth for test instance " +
                                 std::to_string(inst.index));
      }
    }
  }

  MetricsRecord evaluate(int epoch, const MlpModel& model, double rho) {
    const auto& test = dataset_.test;
    std::vector<InstanceMetrics> per_instance(test.size());
    std::vector<Eigen::VectorXd> new_proxy(test.size()), new_ref(test.size());

    parallel_for(test.size(), threads_, [&](std::size_t i) {
      const ProblemInstance& inst = test[i];
      EvalOptions opts;
      opts.method = method_;
      opts.rho = rho;
      if (method_ == ProxyMethod::DeepAlm) {
        opts.warm_proxy = warm_proxy_.find(inst.index);
        opts.warm_reference = warm_ref_.find(inst.index);
        opts.out_proxy_x = &new_proxy[i];
        opts.out_reference_x = &new_ref[i];
      }
      per_instance[i] =
          evaluate_instance(dataset_.family, inst.c, model, opts, *truth_map_.at(inst.index));
    });

    if (method_ == ProxyMethod::DeepAlm) {
      for (std::size_t i = 0; i < test.size(); ++i) {
        warm_proxy_.put(test[i].index, std::move(new_proxy[i]));
        warm_ref_.put(test[i].index, std::move(new_ref[i]));
      }
    }
    return aggregate(per_instance, epoch);
  }

 private:
  const Dataset& dataset_;
  ProxyMethod method_;
  int threads_;
  std::unordered_map<std::int64_t, const GroundTruth*> truth_map_;
  WarmStartStore warm_proxy_;
  WarmStartStore warm_ref_;
};

}  // namespace

TrainOutputs cmd_train(const RunConfig& cfg) {
  const Dataset dataset = load_dataset(cfg.dataset_path);
  const GroundTruthArchive truth = load_ground_truth(cfg.truth_path);
  const std::uint64_t hash = dataset_hash(cfg.dataset_path);
  if (truth.dataset_hash != hash) {
    throw std::runtime_error("ground-truth archive does not match dataset (hash " +
                             hash_hex(truth.dataset_hash) + " vs " + hash_hex(hash) + ")");
  }
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every >= 1 required");

  TrainConfig train_cfg = cfg.train;
  train_cfg.threads = cfg.strict_serial ? 1 : resolve_threads(cfg.threads);
  const int eval_threads = train_cfg.threads;

  std::filesystem::create_directories(cfg.output_dir);
  const char* tag = cfg.train.method == ProxyMethod::DeepDualAscent ? "dda" : "dalm";
  TrainOutputs outputs;
  outputs.model_path = cfg.output_dir / (std::string("model_") + tag + ".dpxm");
  outputs.metrics_path = cfg.output_dir / (std::string("metrics_") + tag + ".csv");

  std::ofstream csv(outputs.metrics_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open " + outputs.metrics_path.string());
  csv << metrics_csv_header() << "\n";
  csv.flush();

  TestSetEvaluator evaluator(dataset, truth, cfg.train.method, eval_threads);
  const int epochs = cfg.train.epochs;
  const int eval_every = cfg.eval_every;

  const EvalHook hook = [&](int epoch, const MlpModel& model, double rho,
                            const EpochStats& stats) -> std::optional<MetricsRecord> {
    (void)stats;
    const bool due = ((epoch + 1) % eval_every == 0) || epoch == epochs - 1;
    if (!due) return std::nullopt;
    MetricsRecord record = evaluator.evaluate(epoch, model, rho);
    csv << metrics_csv_row(record) << "\n";
    csv.flush();
    return record;
  };

  TrainResult result = run_training(dataset, train_cfg, hook);
  save_model(result.model, outputs.model_path);
  return outputs;
}

MetricsRecord cmd_eval(const EvalArgs& args) {
  const Dataset dataset = load_dataset(args.dataset_path);
  const GroundTruthArchive truth = load_ground_truth(args.truth_path);
  if (truth.dataset_hash != dataset_hash(args.dataset_path)) {
    throw std::runtime_error("ground-truth archive does not match dataset");
  }
  const MlpModel model = load_model(args.model_path);

  const int m = dataset.family.inequality_dim();
  ProxyMethod method;
  if (model.output_dim() == dataset.family.p) {
    method = ProxyMethod::DeepAlm;
  } else if (model.output_dim() == m + dataset.family.p) {
    method = ProxyMethod::DeepDualAscent;
  } else {
    throw std::runtime_error("model output width matches neither method for this family");
  }

  TestSetEvaluator evaluator(dataset, truth, method, resolve_threads(args.threads));
  const MetricsRecord record = evaluator.evaluate(0, model, args.rho);
  if (!args.csv_out.empty()) {
    std::ofstream csv(args.csv_out, std::ios::binary);
    csv << metrics_csv_header() << "\n" << metrics_csv_row(record) << "\n";
  }
  std::cout << metrics_csv_header() << "\n" << metrics_csv_row(record) << "\n";
  return record;
}

// ---------------------------------------------------------------------------
// Check suites
// ---------------------------------------------------------------------------

namespace {

struct CheckContext {
  const CheckOptions& opts;
  std::vector<CheckResult> results;

  void record(const std::string& name, bool passed, const std::string& detail) {
    results.push_back({name, passed, detail});
    std::cout << (passed ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
  }
};

// Scalar objective sum(output_grad .* forward(x)) for finite differencing;
// the model is copied so train-mode stat updates cannot leak between probes.
double eval_scalar(MlpModel model, const Eigen::MatrixXd& batch,
                   const Eigen::MatrixXd& output_grad, bool train_mode) {
  const Eigen::MatrixXd out = forward(model, batch, train_mode);
  return (output_grad.array() * out.array()).sum();
}

bool gradcheck_one_net(std::uint64_t seed, bool use_batchnorm, bool train_mode,
                       double tol, double* worst) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_dist(1, 8);
  std::uniform_real_distribution<double> val(-1.0, 1.0);

  const std::vector<int> dims = {dim_dist(rng), dim_dist(rng), dim_dist(rng)};
  MlpModel model = init_xavier(rng(), dims, use_batchnorm);
  const int batch = 3;
  Eigen::MatrixXd x(batch, dims.front());
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = val(rng);
  Eigen::MatrixXd og(batch, dims.back());
  for (Eigen::Index i = 0; i < og.size(); ++i) og.data()[i] = val(rng);

  ForwardCache cache;
  MlpModel work = model;
  forward(work, x, train_mode, &cache);
  const ParamGrads grads = backward(work, cache, og);

  const double step = 1e-5;
  auto check_tensor = [&](double* base, Eigen::Index size, const double* analytic) {
    for (Eigen::Index i = 0; i < size; ++i) {
      const double saved = base[i];
      base[i] = saved + step;
      const double up = eval_scalar(model, x, og, train_mode);
      base[i] = saved - step;
      const double down = eval_scalar(model, x, og, train_mode);
      base[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(fd - analytic[i]) / std::max(1.0, std::abs(analytic[i]));
      *worst = std::max(*worst, rel);
      if (rel > tol) return false;
    }
    return true;
  };

  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    if (!check_tensor(model.weights[l].data(), model.weights[l].size(),
                      grads.weights[l].data())) {
      return false;
    }
    if (!check_tensor(model.biases[l].data(), model.biases[l].size(),
                      grads.biases[l].data())) {
      return false;
    }
  }
  for (std::size_t l = 0; l < model.batchnorm.size(); ++l) {
    if (!check_tensor(model.batchnorm[l].gamma.data(), model.batchnorm[l].gamma.size(),
                      grads.gamma[l].data())) {
      return false;
    }
    if (!check_tensor(model.batchnorm[l].beta.data(), model.batchnorm[l].beta.size(),
                      grads.beta[l].data())) {
      return false;
    }
  }
  return true;
}

void check_neural_gradients(CheckContext& ctx) {
  const int nets = ctx.opts.quick ? 5 : 20;
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < nets && ok; ++i) {
    const std::uint64_t seed = ctx.opts.seed + static_cast<std::uint64_t>(i);
    ok = gradcheck_one_net(seed, /*bn=*/true, /*train=*/true, 1e-5, &worst) &&
         gradcheck_one_net(seed, /*bn=*/true, /*train=*/false, 1e-5, &worst) &&
         gradcheck_one_net(seed, /*bn=*/false, /*train=*/true, 1e-5, &worst);
  }
  std::ostringstream detail;
  detail << nets << " nets, worst rel err " << worst;
  ctx.record("neural-gradcheck", ok, detail.str());
}

void check_dual_gradients(CheckContext& ctx) {
  const int points = ctx.opts.quick ? 10 : 50;
  const ProblemFamily family = generate_family(ctx.opts.seed, 10, 4, ProblemMode::ConvexQP);
  std::mt19937_64 rng(ctx.opts.seed ^ 0xabcdef);
  std::uniform_real_distribution<double> cdist(-20.0, 20.0);
  std::uniform_real_distribution<double> ldist(0.1, 2.0);
  std::uniform_real_distribution<double> ndist(-2.0, 2.0);

  double worst = 0.0;
  bool ok = true;
  const double sign = ctx.opts.inject_dual_grad_sign_flip ? -1.0 : 1.0;
  for (int t = 0; t < points && ok; ++t) {
    Eigen::VectorXd c(family.n), lambda(family.inequality_dim()), nu(family.p);
    for (auto& v : c) v = cdist(rng);
    for (auto& v : lambda) v = ldist(rng);
    for (auto& v : nu) v = ndist(rng);
    const DualEstimate dual{lambda, nu};

    const DualFunctionResult base = dual_function(family, c, dual);
    auto [g, h] = dual_gradients(family, c, base.recovery);
    g *= sign;
    h *= sign;

    const double step = 1e-5;
    auto fd_at = [&](Eigen::VectorXd l, Eigen::VectorXd n) {
      return dual_function(family, c, DualEstimate{std::move(l), std::move(n)}).value;
    };
    for (int i = 0; i < family.inequality_dim() && ok; ++i) {
      Eigen::VectorXd up = lambda, dn = lambda;
      up[i] += step;
      dn[i] -= step;
      const double fd = (fd_at(up, nu) - fd_at(dn, nu)) / (2.0 * step);
      const double rel = std::abs(fd - g[i]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
      ok = rel <= 1e-4;
    }
    for (int j = 0; j < family.p && ok; ++j) {
      Eigen::VectorXd up = nu, dn = nu;
      up[j] += step;
      dn[j] -= step;
      const double fd = (fd_at(lambda, up) - fd_at(lambda, dn)) / (2.0 * step);
      const double rel = std::abs(fd - h[j]) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
      ok = rel <= 1e-4;
    }
  }
  std::ostringstream detail;
  detail << points << " points, worst rel err " << worst;
  ctx.record("dual-gradcheck", ok, detail.str());
}

ProblemFamily two_var_fixture() {
  ProblemFamily fam;
  fam.n = 2;
  fam.p = 1;
  fam.mode = ProblemMode::ConvexQP;
  fam.Q = Eigen::MatrixXd::Identity(2, 2);
  fam.A = Eigen::MatrixXd::Constant(1, 2, 1.0);
  fam.b = Eigen::VectorXd::Constant(1, 1.0);
  fam.lower = Eigen::VectorXd::Zero(2);
  fam.upper = Eigen::VectorXd::Constant(2, std::numeric_limits<double>::infinity());
  fam.witness = Eigen::VectorXd::Constant(2, 0.5);
  return fam;
}

void check_fixture(CheckContext& ctx) {
  const ProblemFamily fam = two_var_fixture();
  const Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  double worst = 0.0;

  // Closed-form recovery at the hand optimum (lambda*, nu*) = (0, -1).
  const DualEstimate star{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(1, -1.0)};
  const DualFunctionResult dfr = dual_function(fam, c, star);
  worst = std::max(worst, (dfr.recovery.x - Eigen::VectorXd::Constant(2, 0.5)).norm());
  worst = std::max(worst, std::abs(dfr.value - 0.5));

  // Both oracles.
  const GroundTruth pda = projected_dual_ascent(fam, c, 0.5, 100000, 1e-11);
  worst = std::max(worst, (pda.x_star - Eigen::VectorXd::Constant(2, 0.5)).norm());
  worst = std::max(worst, std::abs(pda.nu_star[0] + 1.0));
  const GroundTruth alm = classical_alm(fam, c);
  worst = std::max(worst, (alm.x_star - Eigen::VectorXd::Constant(2, 0.5)).norm());
  worst = std::max(worst, std::abs(alm.nu_star[0] + 1.0));
  worst = std::max(worst, std::abs(alm.f_star - 0.5));
  worst = std::max(worst, std::abs(alm.d_star - 0.5));

  std::ostringstream detail;
  detail << "worst deviation " << worst;
  ctx.record("fixture-2var", worst <= 1e-8, detail.str());
}

void check_weak_duality(CheckContext& ctx) {
  const int trials = ctx.opts.quick ? 20 : 100;
  const ProblemFamily family = generate_family(ctx.opts.seed + 3, 12, 5, ProblemMode::ConvexQP);
  std::mt19937_64 rng(ctx.opts.seed ^ 0x5eed);
  std::uniform_real_distribution<double> cdist(-20.0, 20.0);
  std::uniform_real_distribution<double> dualdist(-3.0, 3.0);

  bool ok = true;
  double worst = -1e300;
  for (int t = 0; t < trials && ok; ++t) {
    Eigen::VectorXd c(family.n), lambda(family.inequality_dim()), nu(family.p);
    for (auto& v : c) v = cdist(rng);
    for (auto& v : lambda) v = dualdist(rng);
    for (auto& v : nu) v = dualdist(rng);
    const DualEstimate dual = DualEstimate::clamped(lambda, nu);
    const double d = dual_function(family, c, dual).value;
    const double f_witness = objective(family, c, family.witness);
    worst = std::max(worst, d - f_witness);
    ok = d <= f_witness + 1e-9;
  }
  std::ostringstream detail;
  detail << trials << " duals, max d - f(x0) = " << worst;
  ctx.record("weak-duality", ok, detail.str());
}

void check_box_solver(CheckContext& ctx) {
  const int trials = ctx.opts.quick ? 8 : 30;
  std::mt19937_64 rng(ctx.opts.seed ^ 0xb0f);
  std::uniform_int_distribution<int> ndist(2, 50);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> qdist(-2.0, 2.0);

  double worst = 0.0;
  bool ok = true;
  for (int t = 0; t < trials && ok; ++t) {
    const int n = ndist(rng);
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = unit(rng);
    const Eigen::MatrixXd H =
        (B.transpose() * B) / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), lower(n), upper(n);
    for (auto& v : q) v = qdist(rng);
    for (int i = 0; i < n; ++i) {
      lower[i] = -2.0 * unit(rng);
      upper[i] = lower[i] + 0.5 + 2.5 * unit(rng);
      if (unit(rng) < 0.2) upper[i] = std::numeric_limits<double>::infinity();
    }

    const FunctionAndGradient fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      grad = 2.0 * (H * x) + q;
      return x.dot(H * x) + q.dot(x);
    };

    BoxSolveConfig cfg;
    cfg.max_iters = 2000;
    cfg.grad_tol = 1e-10;
    const SolveReport lbfgs = minimize_box(fg, Eigen::VectorXd::Zero(n), lower, upper, cfg);

    // Projected-gradient oracle with a safe 1/L step, run to convergence.
    const double L = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H)
                               .eigenvalues()
                               .maxCoeff();
    Eigen::VectorXd x = project_box(Eigen::VectorXd::Zero(n), lower, upper);
    Eigen::VectorXd grad(n);
    for (long it = 0; it < 400000; ++it) {
      fg(x, grad);
      const Eigen::VectorXd next = project_box(x - grad / L, lower, upper);
      if ((next - x).lpNorm<Eigen::Infinity>() <= 1e-13) {
        x = next;
        break;
      }
      x = next;
    }

    const double diff = (lbfgs.x - x).norm();
    worst = std::max(worst, diff);
    const bool in_box =
        (lbfgs.x.array() >= lower.array()).all() && (lbfgs.x.array() <= upper.array()).all();
    ok = diff <= 1e-6 && in_box;
  }
  std::ostringstream detail;
  detail << trials << " quadratics, worst |dx| " << worst;
  ctx.record("box-solver-crosscheck", ok, detail.str());
}

void check_oracle_cross(CheckContext& ctx) {
  const int instances = ctx.opts.quick ? 5 : 20;
  const ProblemFamily family =
      generate_family(ctx.opts.seed + 11, 12, 5, ProblemMode::ConvexQP);
  const double alpha = pda_default_alpha(family);
  std::mt19937_64 rng(ctx.opts.seed ^ 0xc0de);
  std::uniform_real_distribution<double> cdist(-20.0, 20.0);

  std::vector<Eigen::VectorXd> cs(instances);
  for (auto& c : cs) {
    c.resize(family.n);
    for (auto& v : c) v = cdist(rng);
  }

  std::vector<double> diffs(instances), kkts(instances), gaps(instances);
  parallel_for(static_cast<std::size_t>(instances), ctx.opts.threads, [&](std::size_t i) {
    const GroundTruth alm = classical_alm(family, cs[i]);
    const GroundTruth pda = projected_dual_ascent(family, cs[i], alpha);
    diffs[i] = (alm.x_star - pda.x_star).norm();
    kkts[i] = std::max(alm.kkt_residual, pda.kkt_residual);
    gaps[i] = std::abs(alm.f_star - alm.d_star) / (1.0 + std::abs(alm.f_star));
  });

  double worst_diff = 0.0, worst_kkt = 0.0, worst_gap = 0.0;
  for (int i = 0; i < instances; ++i) {
    worst_diff = std::max(worst_diff, diffs[i]);
    worst_kkt = std::max(worst_kkt, kkts[i]);
    worst_gap = std::max(worst_gap, gaps[i]);
  }
  const bool ok = worst_diff <= 1e-5 && worst_kkt <= 1e-6 && worst_gap <= 1e-6;
  std::ostringstream detail;
  detail << instances << " instances, worst |dx| " << worst_diff << ", kkt " << worst_kkt
         << ", duality gap " << worst_gap;
  ctx.record("oracle-crosscheck", ok, detail.str());
}

}  // namespace

std::vector<CheckResult> run_checks(const CheckOptions& opts) {
  CheckContext ctx{opts, {}};
  check_neural_gradients(ctx);
  check_dual_gradients(ctx);
  check_fixture(ctx);
  check_weak_duality(ctx);
  check_box_solver(ctx);
  check_oracle_cross(ctx);
  return std::move(ctx.results);
}

bool cmd_check(const CheckOptions& opts) {
  const auto results = run_checks(opts);
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  std::cout << (all ? "all checks passed" : "CHECK FAILURES PRESENT") << "\n";
  return all;
}

}  // namespace dpx::harness
