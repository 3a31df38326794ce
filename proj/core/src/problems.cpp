#include "dpx/problems.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "dpx/binio.hpp"

namespace dpx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, int rows, int cols,
                               double low, double high) {
  std::uniform_real_distribution<double> dist(low, high);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace

int ProblemFamily::inequality_dim() const {
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lower[i])) ++m;
    if (std::isfinite(upper[i])) ++m;
  }
  return m;
}

bool ProblemFamily::has_finite_upper() const {
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(upper[i])) return true;
  }
  return false;
}

ProblemFamily generate_family(std::uint64_t seed, int n, int p, ProblemMode mode,
                              double eps_q, int max_retries) {
  if (n < 1 || p < 1 || p >= n) {
    throw std::invalid_argument("generate_family: require n >= 1, p >= 1, p < n");
  }
  std::mt19937_64 rng(seed);

  ProblemFamily fam;
  fam.n = n;
  fam.p = p;
  fam.mode = mode;

  const Eigen::MatrixXd m = uniform_matrix(rng, n, n, 0.0, 1.0);
  fam.Q = (m.transpose() * m) / static_cast<double>(n) +
          eps_q * Eigen::MatrixXd::Identity(n, n);
  fam.Q = 0.5 * (fam.Q + fam.Q.transpose()).eval();
  if (Eigen::LLT<Eigen::MatrixXd>(fam.Q).info() != Eigen::Success) {
    throw GenerationError("generate_family: Q failed the Cholesky PD check");
  }

  bool full_rank = false;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    fam.A = uniform_matrix(rng, p, n, -1.0, 1.0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(fam.A);
    if (qr.rank() == p) {
      full_rank = true;
      break;
    }
  }
  if (!full_rank) {
    throw GenerationError("generate_family: A rank-deficient after retry budget");
  }

  fam.witness = uniform_matrix(rng, n, 1, 0.0, 1.0).col(0);
  fam.b = fam.A * fam.witness;
  fam.lower = Eigen::VectorXd::Zero(n);
  fam.upper = Eigen::VectorXd::Constant(n, kInf);
  return fam;
}

Dataset generate_dataset(const ProblemFamily& family, int count, double low,
                         double high, std::uint64_t seed, double split) {
  if (count < 2) throw std::invalid_argument("generate_dataset: count >= 2 required");
  if (!(low < high)) throw std::invalid_argument("generate_dataset: low < high required");
  if (split <= 0.0 || split >= 1.0) {
    throw std::invalid_argument("generate_dataset: split must lie in (0, 1)");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);

  Dataset ds;
  ds.family = family;
  ds.seed = seed;
  ds.sample_low = low;
  ds.sample_high = high;
  ds.split = split;

  const auto n_train =
      static_cast<int>(std::llround(static_cast<double>(count) * split));
  for (int i = 0; i < count; ++i) {
    ProblemInstance inst;
    inst.index = i;
    inst.c.resize(family.n);
    for (int j = 0; j < family.n; ++j) inst.c[j] = dist(rng);
    (i < n_train ? ds.train : ds.test).push_back(std::move(inst));
  }
  return ds;
}

namespace detail {
void check_dims(const ProblemFamily& family, const Eigen::VectorXd& x, const char* what) {
  if (x.size() != family.n) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}
}  // namespace detail

double objective(const ProblemFamily& family, const Eigen::VectorXd& c,
                 const Eigen::VectorXd& x) {
  detail::check_dims(family, c, "objective(c)");
  detail::check_dims(family, x, "objective(x)");
  const double quad = x.dot(family.Q * x);
  if (family.mode == ProblemMode::ConvexQP) return quad + c.dot(x);
  return quad + c.dot(x.array().sin().matrix());
}

Eigen::VectorXd objective_grad(const ProblemFamily& family, const Eigen::VectorXd& c,
                               const Eigen::VectorXd& x) {
  detail::check_dims(family, c, "objective_grad(c)");
  detail::check_dims(family, x, "objective_grad(x)");
  Eigen::VectorXd g = 2.0 * (family.Q * x);
  if (family.mode == ProblemMode::ConvexQP) {
    g += c;
  } else {
    g += (c.array() * x.array().cos()).matrix();
  }
  return g;
}

Eigen::VectorXd equality_residual(const ProblemFamily& family, const Eigen::VectorXd& x) {
  detail::check_dims(family, x, "equality_residual");
  return family.A * x - family.b;
}

Eigen::VectorXd inequality_residual(const ProblemFamily& family, const Eigen::VectorXd& x) {
  detail::check_dims(family, x, "inequality_residual");
  Eigen::VectorXd g(family.inequality_dim());
  int k = 0;
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.lower[i])) g[k++] = family.lower[i] - x[i];
  }
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.upper[i])) g[k++] = x[i] - family.upper[i];
  }
  return g;
}

Eigen::VectorXd inequality_jacobian_t(const ProblemFamily& family,
                                      const Eigen::VectorXd& lambda) {
  if (lambda.size() != family.inequality_dim()) {
    throw std::invalid_argument("inequality_jacobian_t: lambda dimension mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(family.n);
  int k = 0;
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.lower[i])) out[i] -= lambda[k++];
  }
  for (int i = 0; i < family.n; ++i) {
    if (std::isfinite(family.upper[i])) out[i] += lambda[k++];
  }
  return out;
}

namespace {

constexpr std::string_view kDatasetMagic = "DPX1";
constexpr std::uint32_t kDatasetVersion = 1;

void write_instances(std::ostream& os, const std::vector<ProblemInstance>& list) {
  binio::write_u64(os, list.size());
  for (const auto& inst : list) {
    binio::write_i64(os, inst.index);
    binio::write_vector(os, inst.c);
  }
}

std::vector<ProblemInstance> read_instances(std::istream& is) {
  const auto count = binio::read_u64(is);
  if (count > (1ULL << 32)) throw binio::ArchiveError("implausible instance count");
  std::vector<ProblemInstance> list(count);
  for (auto& inst : list) {
    inst.index = binio::read_i64(is);
    inst.c = binio::read_vector(is);
  }
  return list;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw binio::ArchiveError("cannot open for writing: " + path.string());
  binio::write_magic(os, kDatasetMagic);
  binio::write_u32(os, kDatasetVersion);
  binio::write_u32(os, dataset.family.mode == ProblemMode::ConvexQP ? 0u : 1u);
  binio::write_u64(os, static_cast<std::uint64_t>(dataset.family.n));
  binio::write_u64(os, static_cast<std::uint64_t>(dataset.family.p));
  binio::write_matrix(os, dataset.family.Q);
  binio::write_matrix(os, dataset.family.A);
  binio::write_vector(os, dataset.family.b);
  binio::write_vector(os, dataset.family.lower);
  binio::write_vector(os, dataset.family.upper);
  binio::write_vector(os, dataset.family.witness);
  binio::write_u64(os, dataset.seed);
  binio::write_f64(os, dataset.sample_low);
  binio::write_f64(os, dataset.sample_high);
  binio::write_f64(os, dataset.split);
  write_instances(os, dataset.train);
  write_instances(os, dataset.test);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw binio::ArchiveError("cannot open dataset: " + path.string());
  binio::expect_magic(is, kDatasetMagic);
  const auto version = binio::read_u32(is);
  if (version != kDatasetVersion) {
    throw binio::ArchiveError("unsupported dataset version");
  }
  Dataset ds;
  const auto mode = binio::read_u32(is);
  if (mode > 1) throw binio::ArchiveError("unknown problem mode in dataset");
  ds.family.mode = mode == 0 ? ProblemMode::ConvexQP : ProblemMode::NonconvexSin;
  ds.family.n = static_cast<int>(binio::read_u64(is));
  ds.family.p = static_cast<int>(binio::read_u64(is));
  ds.family.Q = binio::read_matrix(is);
  ds.family.A = binio::read_matrix(is);
  ds.family.b = binio::read_vector(is);
  ds.family.lower = binio::read_vector(is);
  ds.family.upper = binio::read_vector(is);
  ds.family.witness = binio::read_vector(is);
  ds.seed = binio::read_u64(is);
  ds.sample_low = binio::read_f64(is);
  ds.sample_high = binio::read_f64(is);
  ds.split = binio::read_f64(is);
  ds.train = read_instances(is);
  ds.test = read_instances(is);
  if (ds.family.Q.rows() != ds.family.n || ds.family.A.rows() != ds.family.p ||
      ds.family.A.cols() != ds.family.n) {
    throw binio::ArchiveError("inconsistent family dimensions in dataset");
  }
  return ds;
}

std::uint64_t dataset_hash(const std::filesystem::path& path) {
  return binio::hash_file(path);
}

void export_instances_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw binio::ArchiveError("cannot open for writing: " + path.string());
  os << "partition,index";
  for (int j = 0; j < dataset.family.n; ++j) os << ",c" << j;
  os << "\n";
  auto emit = [&](const char* part, const std::vector<ProblemInstance>& list) {
    char buf[32];
    for (const auto& inst : list) {
      os << part << "," << inst.index;
      for (int j = 0; j < dataset.family.n; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", inst.c[j]);
        os << "," << buf;
      }
      os << "\n";
    }
  };
  emit("train", dataset.train);
  emit("test", dataset.test);
}

}  // namespace dpx
