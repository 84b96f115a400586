#include "support/gen.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace impact::testing {

std::vector<double> Gen::tied_scores(std::size_t n, int levels) {
  std::vector<double> s(n);
  for (auto& v : s) v = static_cast<double>(integer(0, levels - 1)) / levels;
  return s;
}

std::vector<int> Gen::binary_labels(std::size_t n) {
  std::vector<int> y(n);
  for (auto& v : y) v = coin() ? 1 : 0;
  y[0] = 1;
  y[n - 1] = 0;
  return y;
}

std::vector<int> Gen::sign_labels(std::size_t n) {
  auto y = binary_labels(n);
  for (auto& v : y) v = v ? 1 : -1;
  return y;
}

SparseVector Gen::sparse(std::size_t dim, double density, double lo, double hi) {
  SparseVector v;
  v.dim = dim;
  for (std::size_t j = 0; j < dim; ++j) {
    if (!coin(density)) continue;
    const double x = real(lo, hi);
    if (x != 0.0) v.entries.push_back({static_cast<std::uint32_t>(j), x});
  }
  return v;
}

std::string Gen::word(std::size_t min_len, std::size_t max_len) {
  std::string w(size(min_len, max_len), 'a');
  for (auto& c : w) c = static_cast<char>('a' + integer(0, 25));
  return w;
}

Dataset dense_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& y) {
  Dataset d;
  d.dim = rows.empty() ? 0 : rows[0].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto v = SparseVector::from_dense(rows[i]);
    v.dim = d.dim;
    d.add("r" + std::to_string(i), std::move(v), y[i]);
  }
  return d;
}

TempDir::TempDir(const std::string& tag) {
  static int counter = 0;
  path_ = std::filesystem::temp_directory_path() /
          ("impact-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

}  // namespace impact::testing
