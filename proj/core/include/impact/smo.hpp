#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace impact {

/// Supplies rows of Q, where Q[i][j] = y_i y_j K(x_i, x_j).
class KernelRows {
 public:
  using RowFn = std::function<void(std::size_t row, std::span<double> out)>;
  using DiagFn = std::function<double(std::size_t i)>;

  /// Rows are cached up to `cache_bytes`, least recently used evicted first.
  KernelRows(std::size_t n, RowFn compute, const DiagFn& diagonal, std::size_t cache_bytes);

  std::span<const double> row(std::size_t i);
  double diagonal(std::size_t i) const { return diag_[i]; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  RowFn compute_;
  std::size_t max_rows_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> last_use_;
  std::vector<std::size_t> resident_;
  std::vector<double> diag_;
  std::size_t clock_ = 0;
};

struct SmoOptions {
  double C = 1.0;
  double tol = 1e-3;          // stop when the maximal violating pair gap drops below tol
  long max_iters = 0;         // 0 means max(10'000'000, 100 n)
  bool record_objective = false;
};

struct SmoResult {
  std::vector<double> alpha;
  double rho = 0;             // decision function is sum alpha_i y_i K(x_i, x) - rho
  double max_violation = 0;
  long iterations = 0;
  bool converged = false;
  std::vector<double> dual_objective;  // sum(alpha) - alpha'Q alpha / 2, per iteration if recorded
};

/// Second-order working-set SMO for
///   max sum(alpha) - 1/2 alpha' Q alpha  s.t. 0 <= alpha_i <= C, y' alpha = 0.
/// Labels must be +1 or -1.
SmoResult solve_smo(KernelRows& q, std::span<const int> y, const SmoOptions& options);

}  // namespace impact
