#include "impact/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/parallel.hpp"
#include "impact/rng.hpp"
#include "impact/roc.hpp"
#include "impact/smo.hpp"

namespace impact {

void KernelSpec::validate() const {
  if (kind == KernelKind::Gaussian && !(sigma > 0 && std::isfinite(sigma))) {
    throw ValidationError("gaussian kernel needs sigma > 0");
  }
}

double kernel_value(const KernelSpec& kernel, const SparseVector& a, const SparseVector& b) {
  if (kernel.kind == KernelKind::Linear) return dot(a, b);
  return std::exp(-squared_distance(a, b) / (2.0 * kernel.sigma * kernel.sigma));
}

void Dataset::add(std::string id, SparseVector row, int label) {
  ids.push_back(std::move(id));
  x.push_back(std::move(row));
  y.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.dim = dim;
  for (auto r : rows) out.add(ids[r], x[r], y[r]);
  return out;
}

void Dataset::validate() const {
  if (x.size() != y.size() || ids.size() != y.size()) throw ValidationError("dataset: ragged columns");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == 1) pos = true;
    else if (y[i] == -1) neg = true;
    else throw ValidationError("dataset: labels must be +1 or -1");
    if (x[i].dim != dim) throw ValidationError("dataset: row '" + ids[i] + "' has the wrong dimension");
    for (const auto& e : x[i].entries) {
      if (!std::isfinite(e.value)) throw ValidationError("dataset: non-finite feature in row '" + ids[i] + "'");
    }
  }
  if (!pos || !neg) throw ValidationError("dataset: training needs at least one example of each class");
}

double c_from_lambda(double lambda, std::size_t n) { return 1.0 / (2.0 * static_cast<double>(n) * lambda); }
double lambda_for_unit_c(std::size_t n) { return 1.0 / (2.0 * static_cast<double>(n)); }

double median_pairwise_distance(const std::vector<SparseVector>& rows, std::uint64_t seed, std::size_t max_rows) {
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() > max_rows) {
    Rng rng(seed);
    for (std::size_t i = 0; i < max_rows; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    idx.resize(max_rows);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<double> d;
  d.reserve(idx.size() * (idx.size() - 1) / 2);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) d.push_back(std::sqrt(squared_distance(rows[idx[a]], rows[idx[b]])));
  }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double median = *mid;
  if (d.size() % 2 == 0) median = 0.5 * (median + *std::max_element(d.begin(), mid));
  return median > 0 ? median : 1.0;
}

SvmModel train_svm(const Dataset& data, KernelKind kind, const SvmOptions& options) {
  data.validate();
  const std::size_t n = data.size();
  SvmModel model;
  model.dim = data.dim;
  model.seed = options.seed;
  model.lambda = options.lambda > 0 ? options.lambda : lambda_for_unit_c(n);
  model.C = c_from_lambda(model.lambda, n);
  model.kernel.kind = kind;
  if (kind == KernelKind::Gaussian) {
    model.kernel.sigma = options.sigma > 0 ? options.sigma
                                           : median_pairwise_distance(data.x, mix_seed(options.seed, "sigma"));
  }
  model.kernel.validate();

  std::vector<double> sq_norms(n);
  for (std::size_t i = 0; i < n; ++i) sq_norms[i] = data.x[i].squared_norm();
  const auto& kernel = model.kernel;
  auto entry = [&](std::size_t i, std::size_t j) { return kernel_value(kernel, data.x[i], data.x[j]); };
  KernelRows rows(
      n,
      [&](std::size_t i, std::span<double> out) {
        // Rows are wide enough to be worth splitting; each slot is independent.
        const int jobs = n >= 512 ? options.jobs : 1;
        parallel_for(n, jobs, [&](std::size_t j) { out[j] = data.y[i] * data.y[j] * entry(i, j); });
      },
      [&](std::size_t i) { return kernel.kind == KernelKind::Linear ? sq_norms[i] : 1.0; }, options.cache_bytes);

  SmoOptions smo;
  smo.C = model.C;
  smo.tol = options.tol;
  smo.max_iters = options.max_iters;
  smo.record_objective = options.record_objective;
  auto res = solve_smo(rows, data.y, smo);

  model.bias = -res.rho;
  model.alpha = res.alpha;
  model.stats = {res.iterations, res.max_violation, res.converged, std::move(res.dual_objective)};

  if (kind == KernelKind::Linear) {
    model.weights.assign(data.dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (model.alpha[i] == 0) continue;
      const double coef = model.alpha[i] * data.y[i];
      for (const auto& e : data.x[i].entries) model.weights[e.index] += coef * e.value;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (model.alpha[i] == 0) continue;
      model.support_vectors.push_back(data.x[i]);
      model.dual_coef.push_back(model.alpha[i] * data.y[i]);
    }
  }
  return model;
}

SvmModel train_linear_svm(const Dataset& data, const SvmOptions& options) {
  return train_svm(data, KernelKind::Linear, options);
}

SvmModel train_rbf_svm(const Dataset& data, const SvmOptions& options) {
  return train_svm(data, KernelKind::Gaussian, options);
}

double decision_value(const SvmModel& model, const SparseVector& x) {
  if (x.dim != model.dim) {
    throw ValidationError("decision_value: feature dimension " + std::to_string(x.dim) + " does not match model dimension " +
                          std::to_string(model.dim));
  }
  if (model.kernel.kind == KernelKind::Linear) return dot(x, model.weights) + model.bias;
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    f += model.dual_coef[i] * kernel_value(model.kernel, model.support_vectors[i], x);
  }
  return f;
}

double primal_objective(const SvmModel& model, const Dataset& data) {
  if (model.kernel.kind != KernelKind::Linear) throw ValidationError("primal_objective: linear models only");
  double loss = 0;
  for (std::size_t i = 0; i < data.size(); ++i) loss += std::max(0.0, 1.0 - data.y[i] * decision_value(model, data.x[i]));
  double w2 = 0;
  for (double w : model.weights) w2 += w * w;
  return loss / static_cast<double>(data.size()) + model.lambda * w2;
}

PlattParams fit_platt(std::span<const double> f, std::span<const int> labels) {
  if (f.size() != labels.size()) throw ValidationError("platt: size mismatch");
  double prior1 = 0, prior0 = 0;
  for (int y : labels) (y > 0 ? prior1 : prior0) += 1;
  if (prior1 == 0 || prior0 == 0) throw ValidationError("platt: both classes must be present");

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  constexpr double kEps = 1e-5;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = f.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi : lo;

  auto objective = [&](double a, double b) {
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * a + b;
      v += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1) * z + std::log1p(std::exp(z));
    }
    return v;
  };

  double a = 0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = f[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 0.0001 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2;
    }
    if (step < kMinStep) break;  // line search failed; keep the best point so far
  }
  return {a, b};
}

double platt_probability(const PlattParams& params, double decision) {
  constexpr double kFloor = 1e-15;
  const double z = params.a * decision + params.b;
  const double p = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
  return std::clamp(p, kFloor, 1.0 - kFloor);
}

ProbOutput predict_proba(const SvmModel& model, const SparseVector& x) {
  if (!model.calibrated) throw ValidationError("predict_proba: model is not calibrated");
  ProbOutput out;
  out.decision = decision_value(model, x);
  out.p_high = platt_probability({model.platt_a, model.platt_b}, out.decision);
  out.p_low = 1.0 - out.p_high;
  out.logit = -(model.platt_a * out.decision + model.platt_b);
  return out;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least 2 folds");
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  for (int cls : {1, -1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = static_cast<int>(k % folds);
  }
  return fold;
}

SvmModel train_calibrated(const Dataset& data, KernelKind kind, const SvmOptions& options, int folds) {
  data.validate();
  SvmOptions resolved = options;
  if (kind == KernelKind::Gaussian && resolved.sigma <= 0) {
    resolved.sigma = median_pairwise_distance(data.x, mix_seed(options.seed, "sigma"));
  }

  const auto fold_of = stratified_folds(data.y, folds, mix_seed(options.seed, "calibration-folds"));
  std::vector<double> oof(data.size(), 0.0);
  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == k ? held_rows : train_rows).push_back(i);
    auto fold_data = data.subset(train_rows);
    try {
      fold_data.validate();
    } catch (const ValidationError&) {
      throw ValidationError("calibration fold " + std::to_string(k) + " has a single class");
    }
    const auto fold_model = train_svm(fold_data, kind, resolved);
    for (auto i : held_rows) oof[i] = decision_value(fold_model, data.x[i]);
  }

  auto model = train_svm(data, kind, resolved);
  const auto platt = fit_platt(oof, data.y);
  model.platt_a = platt.a;
  model.platt_b = platt.b;
  model.calibrated = true;
  std::vector<double> ranked(oof.size());
  for (std::size_t i = 0; i < oof.size(); ++i) ranked[i] = -(platt.a * oof[i] + platt.b);
  model.auc_estimate = auc_score(ranked, data.y);
  return model;
}

}  // namespace impact
