#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

// Little-endian binary encoding shared by the DPX1 / DPXG1 / DPXM1 archives.

namespace dpx::binio {

static_assert(std::endian::native == std::endian::little,
              "archive encoding assumes a little-endian host");

/// Error raised for malformed archives (bad magic, version, truncation).
struct ArchiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_bytes(std::ostream& os, const void* data, std::size_t size);
void read_bytes(std::istream& is, void* data, std::size_t size);

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_i64(std::ostream& os, std::int64_t v);
void write_f64(std::ostream& os, double v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
std::int64_t read_i64(std::istream& is);
double read_f64(std::istream& is);

/// Magic strings are written verbatim (no length prefix) and checked on read.
void write_magic(std::ostream& os, std::string_view magic);
void expect_magic(std::istream& is, std::string_view magic);

/// Dense matrices are stored row-major as f64, preceded by their dimensions.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);
void write_vector(std::ostream& os, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector(std::istream& is);

/// FNV-1a over a byte range; used as the dataset fingerprint.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace dpx::binio
