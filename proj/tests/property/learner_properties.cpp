#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "impact/learners.hpp"
#include "impact/roc.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::Gen;

Dataset random_dataset(Gen& g, std::size_t n, std::size_t dim, double separation) {
  Dataset d;
  d.dim = dim;
  const auto y = g.sign_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = g.sparse(dim, 0.7);
    for (auto& e : v.entries) e.value += separation * y[i];
    std::erase_if(v.entries, [](const auto& e) { return e.value == 0.0; });
    d.add("r" + std::to_string(i), v, y[i]);
  }
  return d;
}

TEST(LearnerProperties, DualFeasibilityAndKkt) {
  Gen g(1);
  for (int t = 0; t < 60; ++t) {
    const auto kind = t % 2 ? KernelKind::Gaussian : KernelKind::Linear;
    const auto d = random_dataset(g, g.size(4, 80), g.size(1, 6), g.real(0, 0.6));
    SvmOptions o;
    o.lambda = std::exp(g.real(std::log(1e-3), std::log(1.0)));
    o.seed = static_cast<std::uint64_t>(t);
    const auto m = train_svm(d, kind, o);
    ASSERT_TRUE(m.stats.converged) << t;
    ASSERT_LT(m.stats.max_violation, o.tol) << t;
    ASSERT_DOUBLE_EQ(m.C, 1.0 / (2.0 * static_cast<double>(d.size()) * o.lambda));
    double balance = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      ASSERT_GE(m.alpha[i], 0.0);
      ASSERT_LE(m.alpha[i], m.C);
      balance += m.alpha[i] * d.y[i];
    }
    ASSERT_LE(std::abs(balance), o.tol) << t;
  }
}

TEST(LearnerProperties, DualObjectiveNeverDecreases) {
  Gen g(2);
  for (int t = 0; t < 40; ++t) {
    const auto d = random_dataset(g, g.size(4, 60), g.size(1, 5), g.real(0, 0.5));
    SvmOptions o;
    o.record_objective = true;
    o.sigma = t % 2 ? 0.7 : 0;
    const auto m = train_svm(d, t % 2 ? KernelKind::Gaussian : KernelKind::Linear, o);
    const auto& obj = m.stats.dual_objective;
    ASSERT_FALSE(obj.empty());
    for (std::size_t i = 1; i < obj.size(); ++i) {
      ASSERT_GE(obj[i], obj[i - 1] - 1e-12 * std::max(1.0, std::abs(obj[i - 1]))) << t << " iter " << i;
    }
  }
}

TEST(LearnerProperties, GaussianKernelMatricesArePsd) {
  Gen g(3);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = g.size(2, 50), dim = g.size(1, 8);
    std::vector<SparseVector> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(g.sparse(dim, 0.8, -2, 2));
    const auto k = KernelSpec::gaussian(std::exp(g.real(std::log(0.05), std::log(20.0))));
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = kernel_value(k, x[i], x[j]);
    ASSERT_TRUE(m.isApprox(m.transpose(), 0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    ASSERT_GE(es.eigenvalues().minCoeff(), -1e-8) << t;
  }
}

TEST(LearnerProperties, PrimalMatchesSearchOracle) {
  const auto r = testing::svm_oracle_check(100, 4);
  EXPECT_TRUE(r.ok()) << r.failures << " of " << r.instances << "; " << r.first_failure;
}

TEST(LearnerProperties, CalibrationNeverChangesAuc) {
  Gen g(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = g.size(4, 120);
    const auto y = g.sign_labels(n);
    SvmModel m;
    m.dim = 1;
    m.weights = {g.real(0.1, 3)};
    m.bias = g.real(-1, 1);
    m.calibrated = true;
    std::vector<double> f, p_high, logit;
    std::vector<SparseVector> xs;
    for (std::size_t i = 0; i < n; ++i) {
      // Dyadic grid: distinct inputs stay distinct after the affine maps.
      const double x = static_cast<double>(g.integer(-20, 20)) / 8 + 0.25 * y[i];
      xs.push_back(x == 0 ? SparseVector{1, {}} : SparseVector{1, {{0, x}}});
      f.push_back(decision_value(m, xs.back()));
    }
    const auto platt = fit_platt(f, y);
    m.platt_a = platt.a;
    m.platt_b = platt.b;
    for (const auto& x : xs) {
      const auto out = predict_proba(m, x);
      ASSERT_NEAR(out.p_high + out.p_low, 1.0, 1e-9);
      ASSERT_GT(out.p_high, 0.0);
      ASSERT_LT(out.p_high, 1.0);
      p_high.push_back(out.p_high);
      logit.push_back(out.logit);
    }
    ASSERT_TRUE(std::isfinite(platt.a) && std::isfinite(platt.b));
    const double raw = auc_score(f, y);
    if (platt.a < 0) {
      ASSERT_EQ(auc_score(logit, y), raw) << t;
      ASSERT_EQ(auc_score(p_high, y), raw) << t;
    } else if (platt.a > 0) {
      ASSERT_NEAR(auc_score(logit, y), 1.0 - raw, 1e-12) << t;
    }
  }
}

TEST(LearnerProperties, ProbabilityRankingMatchesDecisionRanking) {
  Gen g(6);
  for (int t = 0; t < 300; ++t) {
    SvmModel m;
    m.dim = 2;
    m.weights = {g.real(-2, 2), g.real(-2, 2)};
    m.bias = g.real(-1, 1);
    m.calibrated = true;
    m.platt_a = -g.real(0.1, 5);
    m.platt_b = g.real(-2, 2);
    const std::size_t n = g.size(4, 80);
    const auto y = g.binary_labels(n);
    std::vector<double> f, p, l;
    for (std::size_t i = 0; i < n; ++i) {
      SparseVector x{2, {{0, g.real(-1, 1)}, {1, g.real(-1, 1)}}};
      const auto out = predict_proba(m, x);
      f.push_back(out.decision);
      p.push_back(out.p_high);
      l.push_back(out.logit);
    }
    ASSERT_EQ(auc_score(l, y), auc_score(f, y));
    ASSERT_EQ(auc_score(p, y), auc_score(f, y));
  }
}

}  // namespace
}  // namespace impact
