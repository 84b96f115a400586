#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "impact/corpus.hpp"
#include "impact/sift.hpp"

namespace impact {

std::string_view toolkit_version();

/// Every knob that influences an output artifact. `jobs` is deliberately
/// absent from the canonical form: parallel runs must match serial ones.
struct RunConfig {
  std::filesystem::path root;
  std::filesystem::path manifest;
  SplitRatios ratios;
  std::uint64_t seed = 1;

  std::size_t max_terms = 50000;

  SiftParams sift;
  int page_height = 300;
  std::size_t k = 100;          // ignored when select_k is set
  bool select_k = false;
  std::size_t k0 = 4;
  std::size_t max_k = 2916;
  std::size_t max_cluster_descriptors = 500000;
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-4;

  double lambda_text = 0;       // 0: C = 1
  double lambda_visual = 0;
  double lambda_meta = 0;
  double sigma = 0;             // 0: median pairwise distance
  double svm_tol = 1e-3;
  int calibration_folds = 3;
  int folds = 5;

  std::vector<double> gamma_grid;  // empty: {0, 0.05, ..., 0.30}
  double gamma = 0.25;
  bool sweep_gamma = true;

  std::vector<std::string> venue_watchlist = {"acm", "arxiv", "ieee"};

  std::filesystem::path out_dir;
  int jobs = 0;

  /// Sorted key=value lines.
  std::string canonical_text() const;
  std::string hash() const;
  /// Hash of the subset of keys that a given stage depends on.
  std::string stage_hash(const std::string& stage) const;

  /// Inverse of canonical_text. Paths and jobs are not part of it and keep
  /// their defaults; unknown keys are rejected.
  static RunConfig from_canonical_text(std::string_view text);
};

}  // namespace impact
