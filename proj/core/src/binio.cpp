#include "dpx/binio.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace dpx::binio {

void write_bytes(std::ostream& os, const void* data, std::size_t size) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!os) throw ArchiveError("write failed");
}

void read_bytes(std::istream& is, void* data, std::size_t size) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(is.gcount()) != size) {
    throw ArchiveError("unexpected end of archive");
  }
}

void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, &v, sizeof v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_bytes(os, &v, sizeof v); }
void write_i64(std::ostream& os, std::int64_t v) { write_bytes(os, &v, sizeof v); }
void write_f64(std::ostream& os, double v) { write_bytes(os, &v, sizeof v); }

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v;
  read_bytes(is, &v, sizeof v);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v;
  read_bytes(is, &v, sizeof v);
  return v;
}

std::int64_t read_i64(std::istream& is) {
  std::int64_t v;
  read_bytes(is, &v, sizeof v);
  return v;
}

double read_f64(std::istream& is) {
  double v;
  read_bytes(is, &v, sizeof v);
  return v;
}

void write_magic(std::ostream& os, std::string_view magic) {
  write_bytes(os, magic.data(), magic.size());
}

void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  read_bytes(is, got.data(), got.size());
  if (got != magic) {
    throw ArchiveError("bad archive magic: expected '" + std::string(magic) +
                       "', got '" + got + "'");
  }
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  write_u64(os, static_cast<std::uint64_t>(m.rows()));
  write_u64(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) write_f64(os, m(r, c));
  }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  const auto rows = static_cast<Eigen::Index>(read_u64(is));
  const auto cols = static_cast<Eigen::Index>(read_u64(is));
  if (rows < 0 || cols < 0 || rows > (1 << 24) || cols > (1 << 24)) {
    throw ArchiveError("implausible matrix dimensions in archive");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = read_f64(is);
  }
  return m;
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  write_u64(os, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(os, v[i]);
}

Eigen::VectorXd read_vector(std::istream& is) {
  const auto n = static_cast<Eigen::Index>(read_u64(is));
  if (n < 0 || n > (1 << 28)) throw ArchiveError("implausible vector length in archive");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = read_f64(is);
  return v;
}

void Fnv1a::update(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001b3ULL;
  }
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArchiveError("cannot open file for hashing: " + path.string());
  Fnv1a h;
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h.update(buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  return h.digest();
}

}  // namespace dpx::binio
