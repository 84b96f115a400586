#include "impact/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "impact/error.hpp"
#include "impact/parallel.hpp"
#include "impact/rng.hpp"

namespace impact {

double squared_distance(std::span<const float> point, std::span<const double> centroid) {
  double s = 0;
  for (std::size_t d = 0; d < point.size(); ++d) {
    const double diff = point[d] - centroid[d];
    s += diff * diff;
  }
  return s;
}

std::uint32_t nearest_centroid(std::span<const float> point, const CentroidMatrix& centroids) {
  std::uint32_t best = 0;
  double best_d = squared_distance(point, centroids.row(0));
  const std::size_t dim = point.size();
  for (std::size_t c = 1; c < centroids.rows(); ++c) {
    const auto row = centroids.row(c);
    // Partial sums never decrease, so stopping once they reach best_d cannot
    // change the result, including the lowest-index tie rule.
    double d = 0;
    std::size_t j = 0;
    for (; j < dim; ++j) {
      const double diff = point[j] - row[j];
      d += diff * diff;
      if ((j & 15) == 15 && d >= best_d) break;
    }
    if (j == dim && d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

double kmeans_objective(const PointMatrix& points, const CentroidMatrix& centroids) {
  double total = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    total += squared_distance(points.row(i), centroids.row(nearest_centroid(points.row(i), centroids)));
  }
  return total;
}

std::size_t count_distinct_rows(const PointMatrix& points) {
  std::vector<std::size_t> order(points.rows());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = points.row(a), rb = points.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

namespace {

CentroidMatrix seed_plus_plus(const PointMatrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  CentroidMatrix c{points.dim, {}};
  c.values.reserve(k * points.dim);
  auto push = [&](std::size_t i) {
    for (float v : points.row(i)) c.values.push_back(v);
  };
  push(rng.below(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), c.row(0));
  while (c.rows() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n;
    if (total > 0) {
      const double target = rng.uniform() * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // Rounding left the target past the last positive weight.
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick == n) throw ValidationError("k-means: ran out of distinct points while seeding");
    push(pick);
    const auto latest = c.row(c.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points.row(i), latest));
  }
  return c;
}

void recompute_mean(const PointMatrix& points, const std::vector<std::uint32_t>& assignment, std::uint32_t cluster,
                    std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != cluster) continue;
    const auto p = points.row(i);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += p[d];
    ++count;
  }
  for (auto& v : out) v /= static_cast<double>(count);
}

// Hartigan single-point moves on top of a Lloyd fixed point. A move from
// cluster a to b pays off when n_a/(n_a-1)·d(x,c_a) exceeds n_b/(n_b+1)·d(x,c_b).
// Returns whether any point moved.
bool hartigan_refine(const PointMatrix& points, std::vector<std::uint32_t>& assignment, CentroidMatrix& centroids,
                     int max_passes) {
  const std::size_t n = points.rows(), k = centroids.rows(), dim = points.dim;
  std::vector<double> counts(k, 0.0);
  for (auto a : assignment) ++counts[a];
  for (double c : counts) {
    if (c == 0) return false;
  }
  for (std::size_t c = 0; c < k; ++c) recompute_mean(points, assignment, static_cast<std::uint32_t>(c), centroids.row(c));

  bool any = false;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto from = assignment[i];
      if (counts[from] < 2) continue;
      const auto p = points.row(i);
      const double remove = counts[from] / (counts[from] - 1) * squared_distance(p, centroids.row(from));
      std::uint32_t to = from;
      double best_add = remove * (1 - 1e-12);
      for (std::size_t c = 0; c < k; ++c) {
        if (c == from) continue;
        const double scale = counts[c] / (counts[c] + 1);
        const double bound = best_add / scale;
        const auto row = centroids.row(c);
        double d2 = 0;
        std::size_t j = 0;
        for (; j < dim; ++j) {
          const double diff = p[j] - row[j];
          d2 += diff * diff;
          if ((j & 15) == 15 && d2 >= bound) break;
        }
        if (j < dim) continue;
        const double add = scale * d2;
        if (add < best_add) {
          best_add = add;
          to = static_cast<std::uint32_t>(c);
        }
      }
      if (to == from) continue;
      auto src = centroids.row(from), dst = centroids.row(to);
      for (std::size_t d = 0; d < dim; ++d) {
        src[d] = (src[d] * counts[from] - p[d]) / (counts[from] - 1);
        dst[d] = (dst[d] * counts[to] + p[d]) / (counts[to] + 1);
      }
      --counts[from];
      ++counts[to];
      assignment[i] = to;
      moved = any = true;
    }
    if (!moved) break;
  }
  // Exact means; the incremental updates drift.
  if (any) {
    for (std::size_t c = 0; c < k; ++c) recompute_mean(points, assignment, static_cast<std::uint32_t>(c), centroids.row(c));
  }
  return any;
}

}  // namespace

KMeansResult fit_kmeans(const PointMatrix& points, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t k = options.k;
  if (k < 1) throw ValidationError("k-means: k must be at least 1");
  if (points.dim == 0 || n == 0) throw ValidationError("k-means: no points");
  if (count_distinct_rows(points) < k) {
    throw ValidationError("k-means: fewer distinct points than k=" + std::to_string(k));
  }

  Rng rng(options.seed);
  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignment.assign(n, 0);
  auto& centroids = result.centroids;
  const std::size_t dim = points.dim;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    parallel_for(n, options.jobs, [&](std::size_t i) { result.assignment[i] = nearest_centroid(points.row(i), centroids); });

    // Fixed-order summation keeps the update independent of the worker count.
    CentroidMatrix next{dim, std::vector<double>(k * dim, 0.0)};
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = result.assignment[i];
      auto row = next.row(c);
      const auto p = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] += p[d];
      ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }

    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Steal the worst-served point from a cluster that can spare it.
      std::size_t victim = n;
      double worst = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const auto owner = result.assignment[i];
        if (counts[owner] < 2) continue;
        const double d = squared_distance(points.row(i), next.row(owner));
        if (d > worst) {
          worst = d;
          victim = i;
        }
      }
      if (victim == n) throw RuntimeFailure("k-means: cannot repair empty cluster");
      const auto donor = result.assignment[victim];
      result.assignment[victim] = static_cast<std::uint32_t>(c);
      --counts[donor];
      counts[c] = 1;
      const auto p = points.row(victim);
      auto row = next.row(c);
      for (std::size_t d = 0; d < dim; ++d) row[d] = p[d];
      recompute_mean(points, result.assignment, donor, next.row(donor));
    }

    double max_shift2 = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double shift = 0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = next.row(c)[d] - centroids.row(c)[d];
        shift += diff * diff;
      }
      max_shift2 = std::max(max_shift2, shift);
    }
    centroids = std::move(next);
    ++result.iterations;

    double objective = 0;
    for (std::size_t i = 0; i < n; ++i) objective += squared_distance(points.row(i), centroids.row(result.assignment[i]));
    result.objective_history.push_back(objective);

    if (std::sqrt(max_shift2) <= options.tol) {
      result.converged = true;
      break;
    }
  }
  parallel_for(n, options.jobs, [&](std::size_t i) { result.assignment[i] = nearest_centroid(points.row(i), centroids); });
  if (hartigan_refine(points, result.assignment, centroids, options.max_iters)) {
    double objective = 0;
    for (std::size_t i = 0; i < n; ++i) objective += squared_distance(points.row(i), centroids.row(result.assignment[i]));
    result.objective_history.push_back(objective);
  }
  // Final assignment consistent with the returned centroids.
  parallel_for(n, options.jobs, [&](std::size_t i) { result.assignment[i] = nearest_centroid(points.row(i), centroids); });
  return result;
}

PointMatrix subsample_rows(const PointMatrix& points, std::size_t max_rows, std::uint64_t seed) {
  const std::size_t n = points.rows();
  if (n <= max_rows) return points;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first max_rows slots form the sample.
  for (std::size_t i = 0; i < max_rows; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  PointMatrix out{points.dim, {}};
  out.values.reserve(max_rows * points.dim);
  for (auto i : idx) out.append(points.row(i));
  return out;
}

}  // namespace impact
