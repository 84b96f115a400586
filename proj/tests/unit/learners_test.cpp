#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "impact/error.hpp"
#include "impact/learners.hpp"
#include "impact/roc.hpp"
#include "impact/smo.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::dense_dataset;

SparseVector point(std::vector<double> x) {
  auto v = SparseVector::from_dense(x);
  v.dim = x.size();
  return v;
}

TEST(Kernel, Values) {
  auto a = point({1, 2}), b = point({4, 6});
  EXPECT_EQ(kernel_value(KernelSpec::linear(), a, b), 16.0);
  EXPECT_EQ(kernel_value(KernelSpec::gaussian(0.7), a, a), 1.0);
  EXPECT_DOUBLE_EQ(kernel_value(KernelSpec::gaussian(2.0), a, b), std::exp(-25.0 / 8.0));
  EXPECT_GE(kernel_value(KernelSpec::gaussian(1e6), point({0.3, -0.9}), point({-1, 1})), 1 - 1e-6);
  EXPECT_THROW(KernelSpec::gaussian(0).validate(), ValidationError);
}

TEST(LambdaMapping, UnitC) {
  EXPECT_EQ(c_from_lambda(lambda_for_unit_c(40), 40), 1.0);
  EXPECT_DOUBLE_EQ(c_from_lambda(0.01, 50), 1.0);
}

TEST(LinearSvm, SymmetricOneDimensional) {
  auto d = dense_dataset({{-1}, {1}}, {-1, 1});
  SvmOptions o;
  o.lambda = 1e-3;
  auto m = train_linear_svm(d, o);
  EXPECT_NEAR(m.bias, 0.0, 1e-9);
  EXPECT_NEAR(decision_value(m, point({0})), 0.0, 1e-9);
  for (double x : {-3.0, -0.2, 0.4, 5.0}) EXPECT_EQ(decision_value(m, point({x})) > 0, x > 0);
}

TEST(LinearSvm, DuplicatedPointsGiveSameDecisionFunction) {
  testing::Gen g(5);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    y.push_back(i % 2 ? 1 : -1);
    x.push_back({g.real(-1, 1) + y.back() * 0.3, g.real(-1, 1)});
  }
  auto twice_x = x;
  twice_x.insert(twice_x.end(), x.begin(), x.end());
  auto twice_y = y;
  twice_y.insert(twice_y.end(), y.begin(), y.end());
  SvmOptions o;
  o.lambda = 0.05;
  o.tol = 1e-6;
  auto a = train_linear_svm(dense_dataset(x, y), o);
  auto b = train_linear_svm(dense_dataset(twice_x, twice_y), o);
  for (int i = 0; i < 10; ++i) {
    auto p = point({g.real(-2, 2), g.real(-2, 2)});
    EXPECT_NEAR(decision_value(a, p), decision_value(b, p), 1e-4);
  }
}

TEST(LinearSvm, ZeroVectorScoresBias) {
  auto d = dense_dataset({{1, 0}, {0, 1}, {2, 1}, {-1, -2}}, {1, -1, 1, -1});
  auto m = train_linear_svm(d, {});
  EXPECT_EQ(decision_value(m, point({0, 0})), m.bias);
  EXPECT_THROW(decision_value(m, point({1, 2, 3})), ValidationError);
}

TEST(LinearSvm, FreeSupportVectorsSitOnTheMargin) {
  testing::Gen g(9);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 30; ++i) {
    y.push_back(g.coin() ? 1 : -1);
    x.push_back({g.real(-1, 1) + 0.5 * y.back(), g.real(-1, 1)});
  }
  y[0] = 1, y[1] = -1;
  auto d = dense_dataset(x, y);
  SvmOptions o;
  o.tol = 1e-4;
  auto m = train_linear_svm(d, o);
  int free = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (m.alpha[i] > 1e-9 && m.alpha[i] < m.C - 1e-9) {
      ++free;
      EXPECT_NEAR(decision_value(m, d.x[i]), d.y[i], 1e-4);
    }
  }
  EXPECT_GT(free, 0);
}

TEST(LinearSvm, RejectsBadInput) {
  EXPECT_THROW(train_linear_svm(dense_dataset({{1}, {2}}, {1, 1}), {}), ValidationError);
  auto d = dense_dataset({{1}, {2}}, {1, -1});
  d.x[0].entries[0].value = std::nan("");
  EXPECT_THROW(train_linear_svm(d, {}), ValidationError);
}

TEST(RbfSvm, SolvesXor) {
  auto d = dense_dataset({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {-1, -1, 1, 1});
  SvmOptions o;
  o.sigma = 0.5;
  o.lambda = 1e-3;
  auto m = train_rbf_svm(d, o);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_GT(d.y[i] * decision_value(m, d.x[i]), 0) << i;
  for (double a : m.alpha) {
    EXPECT_GE(a, 0);
    EXPECT_LE(a, m.C);
  }
  // A linear separator cannot get all four right.
  auto lin = train_linear_svm(d, o);
  int correct = 0;
  for (std::size_t i = 0; i < d.size(); ++i) correct += d.y[i] * decision_value(lin, d.x[i]) > 0;
  EXPECT_LT(correct, 4);
}

TEST(RbfSvm, DefaultSigmaIsMedianDistance) {
  std::vector<SparseVector> rows{point({0, 0}), point({3, 4}), point({0, 1})};
  // Pair distances 5, 1, sqrt(18): median sqrt(18).
  EXPECT_DOUBLE_EQ(median_pairwise_distance(rows, 1), std::sqrt(18.0));
  std::vector<SparseVector> same{point({1, 1}), point({1, 1})};
  EXPECT_EQ(median_pairwise_distance(same, 1), 1.0);
}

TEST(Platt, SeparatedScores) {
  std::vector<double> f{-1, -1, -1, 1, 1, 1};
  std::vector<int> y{-1, -1, -1, 1, 1, 1};
  auto p = fit_platt(f, y);
  EXPECT_LT(p.a, 0);
  EXPECT_GT(platt_probability(p, 1), 0.5);
  EXPECT_LT(platt_probability(p, -1), 0.5);
  EXPECT_THROW(fit_platt(f, std::vector<int>(6, 1)), ValidationError);
}

TEST(Platt, RandomLabelsGivePrior) {
  testing::Gen g(17);
  std::vector<double> f(1000);
  std::vector<int> y(1000);
  int pos = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = g.real(-2, 2);
    y[i] = g.coin(0.3) ? 1 : -1;
    pos += y[i] > 0;
  }
  auto p = fit_platt(f, y);
  const double prior = pos / 1000.0;
  for (double v : {-2.0, -1.0, 0.0, 1.0, 2.0}) EXPECT_NEAR(platt_probability(p, v), prior, 0.1);
}

TEST(Platt, MidpointAndRange) {
  SvmModel m;
  m.dim = 1;
  m.weights = {1.0};
  m.calibrated = true;
  m.platt_a = -2.0;
  m.platt_b = 1.0;
  auto out = predict_proba(m, point({0.5}));
  EXPECT_DOUBLE_EQ(out.p_high, 0.5);
  EXPECT_DOUBLE_EQ(out.p_high + out.p_low, 1.0);
  auto far = predict_proba(m, point({1e6}));
  EXPECT_LT(far.p_high, 1.0);
  EXPECT_GT(far.p_low, 0.0);
  EXPECT_GT(far.logit, predict_proba(m, point({1e5})).logit);
  m.calibrated = false;
  EXPECT_THROW(predict_proba(m, point({0.5})), ValidationError);
}

TEST(StratifiedFolds, BalancedAndDeterministic) {
  std::vector<int> y;
  for (int i = 0; i < 31; ++i) y.push_back(i < 13 ? 1 : -1);
  auto f = stratified_folds(y, 3, 4);
  EXPECT_EQ(f, stratified_folds(y, 3, 4));
  for (int k = 0; k < 3; ++k) {
    int pos = 0, neg = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (f[i] == k) (y[i] > 0 ? pos : neg)++;
    EXPECT_NEAR(pos, 13 / 3.0, 1);
    EXPECT_NEAR(neg, 18 / 3.0, 1);
  }
}

TEST(TrainCalibrated, EstimatesAucOutOfFold) {
  testing::Gen g(23);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    y.push_back(i % 2 ? 1 : -1);
    x.push_back({g.real(-1, 1) + 0.8 * y.back(), g.real(-1, 1)});
  }
  auto m = train_calibrated(dense_dataset(x, y), KernelKind::Linear, {}, 3);
  EXPECT_TRUE(m.calibrated);
  EXPECT_GT(m.auc_estimate, 0.8);
  EXPECT_LE(m.auc_estimate, 1.0);
  EXPECT_TRUE(std::isfinite(m.platt_a));
  EXPECT_LT(m.platt_a, 0);
}

TEST(ModelFile, RoundTripIsExact) {
  testing::Gen g(31);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 24; ++i) {
    y.push_back(i % 2 ? 1 : -1);
    x.push_back({g.real(-1, 1) + 0.4 * y.back(), g.real(-1, 1), g.real(0, 1)});
  }
  for (auto kind : {KernelKind::Linear, KernelKind::Gaussian}) {
    auto m = train_calibrated(dense_dataset(x, y), kind, {}, 3);
    m.feature_space = "text:abc";
    m.config_hash = "0123";
    std::stringstream ss;
    write_model(ss, m);
    EXPECT_EQ(ss.str().rfind("IMPACT-MODEL v1\n", 0), 0u);
    auto back = read_model(ss);
    EXPECT_EQ(back.feature_space, "text:abc");
    EXPECT_EQ(back.platt_a, m.platt_a);
    EXPECT_EQ(back.kernel.sigma, m.kernel.sigma);
    for (const auto& row : x) {
      auto p = point(row);
      EXPECT_EQ(decision_value(back, p), decision_value(m, p));
    }
    std::stringstream first, again;
    write_model(first, m);
    write_model(again, back);
    EXPECT_EQ(again.str(), first.str());
  }
  std::stringstream bad("NOT-A-MODEL\n");
  EXPECT_THROW(read_model(bad), ValidationError);
}

TEST(Smo, ConvergesWithFeasibleDuals) {
  testing::Gen g(41);
  const std::size_t n = 40;
  std::vector<SparseVector> x;
  auto y = g.sign_labels(n);
  for (std::size_t i = 0; i < n; ++i) x.push_back(point({g.real(-1, 1) + 0.2 * y[i], g.real(-1, 1)}));
  KernelRows q(
      n, [&](std::size_t i, std::span<double> out) { for (std::size_t j = 0; j < n; ++j) out[j] = y[i] * y[j] * dot(x[i], x[j]); },
      [&](std::size_t i) { return x[i].squared_norm(); }, 1 << 20);
  SmoOptions o;
  o.C = 2.0;
  auto r = solve_smo(q, y, o);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.max_violation, o.tol);
  double balance = 0;
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_GE(r.alpha[i], 0);
    EXPECT_LE(r.alpha[i], o.C);
    balance += r.alpha[i] * y[i];
  }
  EXPECT_NEAR(balance, 0, 1e-9);
}

}  // namespace
}  // namespace impact
