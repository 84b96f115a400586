#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "impact/corpus.hpp"
#include "impact/evaluation.hpp"
#include "impact/fusion.hpp"
#include "impact/kmeans.hpp"
#include "impact/run_config.hpp"
#include "impact/text_features.hpp"
#include "impact/visual_features.hpp"

namespace impact {

/// Raw per-document features. They do not depend on the training domain, so
/// one store serves every experiment over a corpus.
struct DocumentFeatures {
  TokenList tokens;
  PointMatrix descriptors{kDescriptorSize, {}};
};

struct FeatureStore {
  std::map<std::string, DocumentFeatures> docs;
  const DocumentFeatures& at(const std::string& id) const;
};

TokenList read_document_tokens(const DocumentRecord& record, const std::filesystem::path& root);
PointMatrix extract_document_descriptors(const DocumentRecord& record, const std::filesystem::path& root,
                                         const RunConfig& config);

/// Tokens for every record, plus SIFT descriptors when `visual` is set. If
/// `cache` is non-empty descriptors are read from / written to that file,
/// keyed by the "sift" stage hash.
FeatureStore extract_features(const CorpusManifest& manifest, const RunConfig& config, int jobs, bool visual = true,
                              const std::filesystem::path& cache = {});

/// Records of `domain` ("combined" selects all) in `split`, ordered by id.
std::vector<const DocumentRecord*> documents_in(const CorpusManifest& manifest, const std::string& domain,
                                                Split split);
void require_domain(const CorpusManifest& manifest, const std::string& domain);

int label_sign(const DocumentRecord& record);

Vocabulary fit_text_space(const std::vector<const DocumentRecord*>& train, const FeatureStore& store,
                          const RunConfig& config);
Dataset text_dataset(const std::vector<const DocumentRecord*>& docs, const FeatureStore& store,
                     const Vocabulary& vocabulary);

/// Clusters the training descriptors (k fixed or chosen on `dev`) and fits the
/// standardizer on the training BoVW counts.
VisualVocabulary fit_visual_space(const std::vector<const DocumentRecord*>& train,
                                  const std::vector<const DocumentRecord*>& dev, const FeatureStore& store,
                                  const RunConfig& config, int jobs, SelectKResult* k_trace = nullptr);
Dataset visual_dataset(const std::vector<const DocumentRecord*>& docs, const FeatureStore& store,
                       const VisualVocabulary& vocabulary, int jobs);

SvmOptions text_svm_options(const RunConfig& config, int jobs);
SvmOptions visual_svm_options(const RunConfig& config, int jobs);
BaseLearner text_learner(const RunConfig& config, const std::string& fingerprint, int jobs);
BaseLearner visual_learner(const RunConfig& config, const std::string& fingerprint, int jobs);

/// Everything fitted on one training domain.
struct TrainedDomain {
  std::string domain;
  Vocabulary vocabulary;
  VisualVocabulary visual_vocabulary;
  SelectKResult k_trace;
  FusionModel fusion;
  GammaSweep gamma_sweep;
  std::size_t n_train = 0;
  std::size_t n_dev = 0;
};

TrainedDomain train_domain(const CorpusManifest& manifest, const FeatureStore& store, const std::string& domain,
                           const RunConfig& config, int jobs);

/// Base, meta and selector outputs on the dev split of the training domain.
struct DevOutputs {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<ProbOutput> text;
  std::vector<ProbOutput> visual;
};
DevOutputs dev_outputs(const TrainedDomain& trained, const CorpusManifest& manifest, const FeatureStore& store,
                       int jobs);

/// Scores a test set with the base, meta and (optionally) selector outputs.
/// Only the classifier curves and n_test are filled in.
EvalReport evaluate_fusion(const FusionModel& fusion, const Dataset& text, const Dataset& visual,
                           bool include_nonlinear = true);

/// Sweeps gamma for the selector on a dev set given as feature datasets.
GammaSweep sweep_gamma_on(const FusionModel& fusion, const Dataset& text, const Dataset& visual,
                          const std::vector<double>& grid);

/// Fills seed, config hash, toolkit version and the protocol note.
void stamp_report(EvalReport& report, const RunConfig& config);

EvalReport evaluate_domain(const TrainedDomain& trained, const CorpusManifest& manifest, const FeatureStore& store,
                           const std::string& test_domain, const RunConfig& config, int jobs);

EvalReport run_experiment(const std::string& train_domain, const std::string& test_domain,
                          const CorpusManifest& manifest, const FeatureStore& store, const RunConfig& config,
                          int jobs);

struct MatrixResult {
  std::map<std::string, TrainedDomain> trained;
  std::vector<EvalReport> reports;  // in the order of the requested pairs
};

/// Trains once per distinct training domain, then evaluates every pair.
MatrixResult run_matrix(const CorpusManifest& manifest, const FeatureStore& store, const RunConfig& config,
                        const std::vector<std::pair<std::string, std::string>>& pairs, int jobs);

/// The intra- and inter-domain pairs for a two-domain corpus.
std::vector<std::pair<std::string, std::string>> standard_pairs(const std::vector<std::string>& domains);

/// Textual feature dumps: a header line carrying the feature-space
/// fingerprint, config hash, seed and toolkit version, then one
/// "label doc_id col:weight ..." row per document.
struct FeatureDump {
  std::string kind;  // text or visual
  std::string fingerprint;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string toolkit;
  Dataset data;
};
void write_feature_dump(const std::filesystem::path& file, const FeatureDump& dump);
FeatureDump read_feature_dump(const std::filesystem::path& file);

}  // namespace impact
