#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "impact/sparse.hpp"

namespace impact {

enum class KernelKind { Linear, Gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double sigma = 1.0;  // Gaussian width, unused for Linear

  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }
  static KernelSpec gaussian(double sigma) { return {KernelKind::Gaussian, sigma}; }
  void validate() const;
};

/// exp(-||a - b||^2 / (2 sigma^2)) or a . b.
double kernel_value(const KernelSpec& kernel, const SparseVector& a, const SparseVector& b);

/// Labelled training rows. y is +1 for High and -1 for Low.
struct Dataset {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<SparseVector> x;
  std::vector<int> y;

  std::size_t size() const noexcept { return x.size(); }
  void add(std::string id, SparseVector row, int label);
  Dataset subset(std::span<const std::size_t> rows) const;
  void validate() const;
};

/// Hinge-loss objective mean(max(0, 1 - y f(x))) + lambda ||w||^2 maps onto
/// the C-form dual through C = 1 / (2 n lambda).
double c_from_lambda(double lambda, std::size_t n);
double lambda_for_unit_c(std::size_t n);

struct SvmOptions {
  double lambda = 0;       // 0 selects lambda = 1 / (2n), i.e. C = 1
  double sigma = 0;        // Gaussian only; 0 selects the median pairwise distance
  double tol = 1e-3;
  long max_iters = 0;      // 0 lets the solver pick
  std::uint64_t seed = 0;
  int jobs = 1;
  std::size_t cache_bytes = std::size_t{256} << 20;
  bool record_objective = false;
};

struct TrainStats {
  long iterations = 0;
  double max_violation = 0;
  bool converged = false;
  std::vector<double> dual_objective;
};

struct SvmModel {
  KernelSpec kernel;
  std::size_t dim = 0;
  double lambda = 0;
  double C = 0;
  double bias = 0;
  std::vector<double> weights;                  // Linear: dense primal weights
  std::vector<SparseVector> support_vectors;    // Gaussian
  std::vector<double> dual_coef;                // alpha_i y_i, parallel to support_vectors
  std::vector<double> alpha;                    // all training duals (not persisted)
  bool calibrated = false;
  double platt_a = 0;
  double platt_b = 0;
  double auc_estimate = 0;
  std::uint64_t seed = 0;
  std::string feature_space;                    // fingerprint of the input space
  std::string config_hash;
  TrainStats stats;
};

SvmModel train_linear_svm(const Dataset& data, const SvmOptions& options);
SvmModel train_rbf_svm(const Dataset& data, const SvmOptions& options);
SvmModel train_svm(const Dataset& data, KernelKind kind, const SvmOptions& options);

/// Median Euclidean distance over all pairs of a seeded subsample of at most
/// max_rows rows. Falls back to 1 when every sampled pair coincides.
double median_pairwise_distance(const std::vector<SparseVector>& rows, std::uint64_t seed,
                                std::size_t max_rows = 1000);

double decision_value(const SvmModel& model, const SparseVector& x);

/// Primal objective mean hinge + lambda ||w||^2 of a linear model on data.
double primal_objective(const SvmModel& model, const Dataset& data);

struct PlattParams {
  double a = 0;
  double b = 0;
};

/// Fits P(High | f) = 1 / (1 + exp(a f + b)) by regularized maximum
/// likelihood with Platt's smoothed targets and a damped Newton method.
PlattParams fit_platt(std::span<const double> decision_values, std::span<const int> labels);

/// Sigmoid of the Platt fit, clamped into (0, 1).
double platt_probability(const PlattParams& params, double decision);

struct ProbOutput {
  double p_high = 0.5;
  double p_low = 0.5;
  double decision = 0;
  /// -(a f + b): strictly increasing in p_high but never saturates, so it is
  /// the score used for ranking.
  double logit = 0;
};

ProbOutput predict_proba(const SvmModel& model, const SparseVector& x);

/// Stratified fold ids in [0, folds): each class is shuffled (seeded) and
/// dealt round-robin.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Trains with out-of-fold calibration: decision values from `folds`
/// held-out fits feed the Platt fit and the AUC estimate, then the final
/// model is trained on all rows.
SvmModel train_calibrated(const Dataset& data, KernelKind kind, const SvmOptions& options, int folds = 3);

void write_model(std::ostream& out, const SvmModel& model);
SvmModel read_model(std::istream& in);
void save_model(const std::string& path, const SvmModel& model);
SvmModel load_model(const std::string& path);

}  // namespace impact
