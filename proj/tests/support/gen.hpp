#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "impact/learners.hpp"
#include "impact/sparse.hpp"

namespace impact::testing {

/// Hand-rolled generator for property tests. Kept separate from impact::Rng so
/// the code under test never shares a random stream with its oracle.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  std::size_t size(std::size_t lo, std::size_t hi) { return static_cast<std::size_t>(integer(lo, hi)); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return real(0, 1) < p; }

  /// Scores drawn from a few distinct levels so ties are common.
  std::vector<double> tied_scores(std::size_t n, int levels);
  /// Labels in {0, 1} with both classes present.
  std::vector<int> binary_labels(std::size_t n);
  /// Labels in {-1, +1} with both classes present.
  std::vector<int> sign_labels(std::size_t n);

  SparseVector sparse(std::size_t dim, double density, double lo = -1, double hi = 1);
  std::string word(std::size_t min_len, std::size_t max_len);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

Dataset dense_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& y);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, const std::string& content);

}  // namespace impact::testing
