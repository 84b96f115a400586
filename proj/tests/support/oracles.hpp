#pragma once

#include <span>
#include <vector>

namespace impact::testing {

/// (concordant + ties / 2) / (pos * neg) by visiting every positive/negative
/// pair. Labels > 0 are positive.
double pair_count_auc(std::span<const double> scores, std::span<const int> labels);

/// Minimum k-means objective over every partition of the points into exactly
/// k non-empty blocks. Points are row-major with `dim` columns.
double exhaustive_kmeans_optimum(const std::vector<double>& points, std::size_t dim, std::size_t k);

/// mean(max(0, 1 - y (w.x + b))) + lambda |w|^2 on dense rows.
double hinge_primal(const std::vector<std::vector<double>>& x, std::span<const int> y, std::span<const double> w,
                    double b, double lambda);

/// Minimum of hinge_primal over (w, b) by a coarse grid followed by nested
/// golden-section refinement. Works for 1 or 2 feature dimensions.
double search_hinge_primal(const std::vector<std::vector<double>>& x, std::span<const int> y, double lambda);

}  // namespace impact::testing
