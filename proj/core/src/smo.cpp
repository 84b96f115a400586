#include "impact/smo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "impact/error.hpp"

namespace impact {

KernelRows::KernelRows(std::size_t n, RowFn compute, const DiagFn& diagonal, std::size_t cache_bytes)
    : n_(n), compute_(std::move(compute)), rows_(n), last_use_(n, 0), diag_(n) {
  max_rows_ = std::max<std::size_t>(2, cache_bytes / std::max<std::size_t>(1, n * sizeof(double)));
  for (std::size_t i = 0; i < n; ++i) diag_[i] = diagonal(i);
}

std::span<const double> KernelRows::row(std::size_t i) {
  ++clock_;
  if (rows_[i].empty()) {
    if (resident_.size() >= max_rows_) {
      auto victim = std::min_element(resident_.begin(), resident_.end(),
                                     [&](std::size_t a, std::size_t b) { return last_use_[a] < last_use_[b]; });
      rows_[*victim].clear();
      rows_[*victim].shrink_to_fit();
      *victim = i;
    } else {
      resident_.push_back(i);
    }
    rows_[i].resize(n_);
    compute_(i, rows_[i]);
  }
  last_use_[i] = clock_;
  return rows_[i];
}

namespace {

constexpr double kTau = 1e-12;

double dual_value(std::span<const double> alpha, std::span<const double> grad) {
  // With G = Q alpha - e: alpha'Q alpha = sum alpha_i (G_i + 1).
  double v = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) v += alpha[i] - 0.5 * alpha[i] * (grad[i] + 1.0);
  return v;
}

}  // namespace

SmoResult solve_smo(KernelRows& q, std::span<const int> y, const SmoOptions& options) {
  const std::size_t n = y.size();
  if (q.size() != n) throw ValidationError("smo: kernel and label sizes differ");
  const double C = options.C;
  if (!(C > 0) || !std::isfinite(C)) throw ValidationError("smo: C must be positive and finite");
  const long max_iters = options.max_iters > 0 ? options.max_iters
                                               : std::max<long>(10'000'000L, 100L * static_cast<long>(n));

  SmoResult res;
  res.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = res.alpha;
  const auto is_upper = [&](std::size_t t) { return alpha[t] >= C; };
  const auto is_lower = [&](std::size_t t) { return alpha[t] <= 0; };

  for (;;) {
    // Working-set selection (maximal violating pair, second-order choice of j).
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1, j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == +1) {
        if (!is_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!is_lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    std::span<const double> qi;
    if (i >= 0) qi = q.row(static_cast<std::size_t>(i));
    double obj_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n && i >= 0; ++t) {
      const double qii = q.diagonal(static_cast<std::size_t>(i));
      if (y[t] == +1) {
        if (is_lower(t)) continue;
        const double diff = gmax + grad[t];
        gmax2 = std::max(gmax2, grad[t]);
        if (diff > 0) {
          const double quad = qii + q.diagonal(t) - 2.0 * y[i] * qi[t];
          const double obj = -(diff * diff) / std::max(quad, kTau);
          if (obj <= obj_min) {
            j = static_cast<std::ptrdiff_t>(t);
            obj_min = obj;
          }
        }
      } else {
        if (is_upper(t)) continue;
        const double diff = gmax - grad[t];
        gmax2 = std::max(gmax2, -grad[t]);
        if (diff > 0) {
          const double quad = qii + q.diagonal(t) + 2.0 * y[i] * qi[t];
          const double obj = -(diff * diff) / std::max(quad, kTau);
          if (obj <= obj_min) {
            j = static_cast<std::ptrdiff_t>(t);
            obj_min = obj;
          }
        }
      }
    }
    res.max_violation = (i < 0) ? 0.0 : gmax + gmax2;
    if (i < 0 || j < 0 || res.max_violation < options.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= max_iters) break;
    ++res.iterations;

    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const auto qj = q.row(uj);
    qi = q.row(ui);  // row(j) may have evicted row(i)
    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];

    if (y[ui] != y[uj]) {
      double quad = q.diagonal(ui) + q.diagonal(uj) + 2.0 * qi[uj];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[ui] - grad[uj]) / quad;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0) {
        if (alpha[uj] < 0) {
          alpha[uj] = 0;
          alpha[ui] = diff;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = -diff;
      }
      if (diff > 0) {
        if (alpha[ui] > C) {
          alpha[ui] = C;
          alpha[uj] = C - diff;
        }
      } else if (alpha[uj] > C) {
        alpha[uj] = C;
        alpha[ui] = C + diff;
      }
    } else {
      double quad = q.diagonal(ui) + q.diagonal(uj) - 2.0 * qi[uj];
      if (quad <= 0) quad = kTau;
      const double delta = (grad[ui] - grad[uj]) / quad;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > C) {
        if (alpha[ui] > C) {
          alpha[ui] = C;
          alpha[uj] = sum - C;
        }
      } else if (alpha[uj] < 0) {
        alpha[uj] = 0;
        alpha[ui] = sum;
      }
      if (sum > C) {
        if (alpha[uj] > C) {
          alpha[uj] = C;
          alpha[ui] = sum - C;
        }
      } else if (alpha[ui] < 0) {
        alpha[ui] = 0;
        alpha[uj] = sum;
      }
    }

    const double dai = alpha[ui] - old_ai;
    const double daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;
    if (options.record_objective) res.dual_objective.push_back(dual_value(alpha, grad));
  }

  // Offset: average over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] == +1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2;
  return res;
}

}  // namespace impact
