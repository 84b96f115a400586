#pragma once

#include <cstdint>
#include <string>

namespace impact::testing {

/// Outcome of a randomized oracle comparison.
struct CheckResult {
  int instances = 0;
  int failures = 0;
  double worst = 0;  // largest observed discrepancy
  std::string first_failure;
  bool ok() const { return instances > 0 && failures == 0; }
};

/// Trapezoidal AUC against pair counting on random tied instances, exact.
CheckResult auc_oracle_check(int instances, std::uint64_t seed);

/// Best of 20 seeded k-means runs against exhaustive partitioning
/// (<= 12 points, k <= 3, dim <= 3), relative 1e-6.
CheckResult kmeans_oracle_check(int instances, std::uint64_t seed);

/// Linear SVM primal objective against golden-section search over (w, b)
/// on 1-D / 2-D instances with n <= 20, relative 1e-3.
CheckResult svm_oracle_check(int instances, std::uint64_t seed);

/// The two-document worked corpus against hand-evaluated weights, 1e-12.
CheckResult tfidf_worked_check();

}  // namespace impact::testing
