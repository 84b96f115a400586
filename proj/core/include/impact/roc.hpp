#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace impact {

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  double threshold = 0;  // scores >= threshold are called positive; +inf for the origin
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;

  /// Trapezoidal area recomputed from the stored points.
  double trapezoid_area() const;
};

/// Sweeps thresholds over the distinct scores in descending order. Tied
/// scores enter together, producing a diagonal segment. The area is
/// accumulated in integers, so it equals the pair-counting statistic
/// (concordant + ties / 2) / (pos * neg) exactly. A label > 0 marks the
/// positive class. Throws ValidationError unless both classes are present.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Convenience: AUC only.
double auc_score(std::span<const double> scores, std::span<const int> labels);

}  // namespace impact
