#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "impact/roc.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

namespace impact {
namespace {

using testing::Gen;

TEST(EvaluationProperties, TrapezoidEqualsPairCountingExactly) {
  const auto r = testing::auc_oracle_check(1000, 1);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(EvaluationProperties, CurveIsMonotoneAndAreaMatches) {
  Gen g(2);
  for (int t = 0; t < 1000; ++t) {
    const auto n = g.size(2, 200);
    const auto y = g.binary_labels(n);
    const auto s = g.tied_scores(n, static_cast<int>(g.integer(1, 50)));
    const auto c = roc_auc(s, y);
    ASSERT_EQ(c.points.front().fpr, 0.0);
    ASSERT_EQ(c.points.front().tpr, 0.0);
    ASSERT_EQ(c.points.back().fpr, 1.0);
    ASSERT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      ASSERT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      ASSERT_GE(c.points[i].tpr, c.points[i - 1].tpr);
      ASSERT_LT(c.points[i].threshold, c.points[i - 1].threshold);
    }
    ASSERT_GE(c.auc, 0.0);
    ASSERT_LE(c.auc, 1.0);
    ASSERT_NEAR(c.trapezoid_area(), c.auc, 1e-12);
    ASSERT_EQ(c.points.size(), std::set<double>(s.begin(), s.end()).size() + 1);
  }
}

TEST(EvaluationProperties, NegatedScoresComplement) {
  Gen g(3);
  for (int t = 0; t < 1000; ++t) {
    const auto n = g.size(2, 200);
    const auto y = g.binary_labels(n);
    std::vector<double> s(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = g.real(-1, 1), neg[i] = -s[i];
    ASSERT_NEAR(auc_score(s, y) + auc_score(neg, y), 1.0, 1e-12);
  }
}

TEST(EvaluationProperties, InvariantUnderIncreasingTransforms) {
  Gen g(4);
  for (int t = 0; t < 1000; ++t) {
    const auto n = g.size(2, 200);
    const auto y = g.binary_labels(n);
    const auto s = g.tied_scores(n, 20);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = std::exp(3 * s[i]) - 7;
      b[i] = std::atan(s[i] * 5) + s[i];
    }
    const double base = auc_score(s, y);
    ASSERT_EQ(auc_score(a, y), base);
    ASSERT_EQ(auc_score(b, y), base);
  }
}

TEST(EvaluationProperties, PermutedLabelsAverageOneHalf) {
  Gen g(5);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 200;
    std::vector<double> s(n);
    for (auto& v : s) v = g.real(0, 1);
    auto y = g.binary_labels(n);
    double mean = 0;
    for (int p = 0; p < 100; ++p) {
      std::shuffle(y.begin(), y.end(), g.engine());
      mean += auc_score(s, y);
    }
    EXPECT_NEAR(mean / 100, 0.5, 0.05);
  }
}

}  // namespace
}  // namespace impact
