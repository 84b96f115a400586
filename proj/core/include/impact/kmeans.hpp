#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace impact {

/// Row-major float points (descriptors are stored this way).
struct PointMatrix {
  std::size_t dim = 0;
  std::vector<float> values;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void append(std::span<const float> point) { values.insert(values.end(), point.begin(), point.end()); }
};

struct CentroidMatrix {
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

struct KMeansOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-4;  // stop once no centroid moves farther than this
  int jobs = 1;
};

struct KMeansResult {
  CentroidMatrix centroids;
  std::vector<std::uint32_t> assignment;
  std::vector<double> objective_history;  // after each Lloyd iteration
  int iterations = 0;
  bool converged = false;
};

double squared_distance(std::span<const float> point, std::span<const double> centroid);

/// Index of the closest centroid; ties go to the lowest index.
std::uint32_t nearest_centroid(std::span<const float> point, const CentroidMatrix& centroids);

/// Sum over points of the squared distance to the nearest centroid.
double kmeans_objective(const PointMatrix& points, const CentroidMatrix& centroids);

std::size_t count_distinct_rows(const PointMatrix& points);

/// k-means++ seeding, Lloyd iterations, then Hartigan single-point moves
/// until no move lowers the objective. Empty clusters are re-seeded with the
/// point farthest from its centroid, so the objective never increases. Throws ValidationError when there are fewer than k
/// distinct points.
KMeansResult fit_kmeans(const PointMatrix& points, const KMeansOptions& options);

/// Uniform sample of at most max_rows rows without replacement, original
/// order preserved.
PointMatrix subsample_rows(const PointMatrix& points, std::size_t max_rows, std::uint64_t seed);

}  // namespace impact
