#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace impact {

/// Sorted sparse vector. Column ids are strictly increasing and below dim;
/// explicit zeros are never stored.
struct SparseVector {
  struct Entry {
    std::uint32_t index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  std::size_t dim = 0;
  std::vector<Entry> entries;

  bool empty() const noexcept { return entries.empty(); }
  std::size_t nnz() const noexcept { return entries.size(); }

  double squared_norm() const;
  std::vector<double> to_dense() const;

  static SparseVector from_dense(std::span<const double> dense);

  /// Throws ValidationError if any structural invariant is broken.
  void validate() const;

  bool operator==(const SparseVector&) const = default;
};

double dot(const SparseVector& a, const SparseVector& b);
double dot(const SparseVector& a, std::span<const double> dense);
double squared_distance(const SparseVector& a, const SparseVector& b);

/// One row of a textual feature dump: "doc_id col:weight col:weight ...".
std::string format_sparse_row(const std::string& doc_id, const SparseVector& v);
/// Inverse of format_sparse_row; dim must be supplied by the caller.
SparseVector parse_sparse_row(const std::string& line, std::size_t dim, std::string& doc_id);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);
/// Fixed 17 significant digits, used by the model file format.
std::string format_double17(double value);
double parse_double(std::string_view text);

}  // namespace impact
