#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "impact/kmeans.hpp"
#include "impact/sift.hpp"
#include "impact/sparse.hpp"

namespace impact {

inline constexpr std::size_t kMaxClusteringDescriptors = 500000;

/// Per-dimension mean removal and variance scaling (population stdev).
/// Dimensions with zero variance only have their mean removed.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stdev;

  std::vector<double> apply(std::span<const double> x) const;
  SparseVector apply(const SparseVector& x) const;
  std::vector<std::size_t> constant_dimensions() const;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& train_vectors);
Standardizer fit_standardizer(const std::vector<SparseVector>& train_vectors);

struct VisualVocabulary {
  CentroidMatrix centroids;
  Standardizer standardizer;

  std::size_t k() const noexcept { return centroids.rows(); }
  std::string fingerprint() const;

  void save(const std::filesystem::path& file, const std::string& provenance = {}) const;
  static VisualVocabulary load(const std::filesystem::path& file);
};

struct BovwVector {
  SparseVector counts;
  bool zero = false;  // document had no descriptors
};

/// Occurrence counts of nearest centroids (ties to the lowest index).
BovwVector bovw_vector(const PointMatrix& descriptors, const CentroidMatrix& centroids);

struct SelectKOptions {
  std::size_t k0 = 4;
  std::size_t factor = 3;
  std::size_t max_k = 2916;  // 4 * 3^6
};

struct SelectKResult {
  std::size_t k = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // (k, dev AUC) in evaluation order
};

/// Evaluates k0, factor*k0, ... and stops at the first k whose dev score
/// drops below its predecessor's, returning the predecessor. If the score
/// never drops, returns the largest k tried (capped by max_k and by the number
/// of distinct training descriptors).
SelectKResult select_k(const std::function<double(std::size_t)>& dev_evaluator, std::size_t distinct_points,
                       const SelectKOptions& options = {});

/// Descriptor cache: a sequence of per-document blocks behind a versioned
/// header. All integers and floats are little-endian.
struct DescriptorBlock {
  std::string doc_id;
  PointMatrix descriptors;  // dim 128
};

void write_descriptor_cache(const std::filesystem::path& file, const std::vector<DescriptorBlock>& blocks,
                            const std::string& config_hash);
std::vector<DescriptorBlock> read_descriptor_cache(const std::filesystem::path& file, std::string* config_hash = nullptr);

PointMatrix descriptors_of(const std::vector<SiftFeature>& features);

}  // namespace impact
