#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "impact/fusion.hpp"
#include "impact/learners.hpp"
#include "impact/roc.hpp"
#include "impact/text_features.hpp"

namespace impact {

inline constexpr const char* kCombinedDomain = "combined";

struct ClassifierCurve {
  std::string name;      // text, visual, meta, nonlinear
  RocCurve roc;
  bool headline = true;  // the nonlinear selector is reported but not compared
};

struct EvalReport {
  std::string train_domain;
  std::string test_domain;
  std::vector<ClassifierCurve> classifiers;
  std::size_t n_train = 0;
  std::size_t n_dev = 0;
  std::size_t n_test = 0;
  std::size_t vocabulary_size = 0;
  std::size_t k = 0;
  double auc_text_weight = 0;    // a_text used by the fusion models
  double auc_visual_weight = 0;
  double gamma = 0;
  std::vector<GammaSweepEntry> gamma_sweep;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string toolkit;
  std::string protocol;

  const ClassifierCurve& classifier(const std::string& name) const;
  double auc(const std::string& name) const { return classifier(name).roc.auc; }
  bool intra_domain() const { return train_domain == test_domain; }
};

/// Writes <stem>.jsonl, <stem>.<classifier>.roc.csv for each classifier and,
/// if requested, <stem>.roc.svg. Returns the paths written.
std::vector<std::filesystem::path> emit_report(const EvalReport& report, const std::filesystem::path& dir,
                                               bool plot = true);
std::string report_stem(const EvalReport& report);

/// Reads the line-delimited report back. Curves carry only their AUC and
/// class counts; the points live in the CSV files.
EvalReport read_report(const std::filesystem::path& jsonl);

/// "fpr,tpr,threshold" header plus one row per curve point.
void write_roc_csv(std::ostream& out, const RocCurve& curve);
std::string roc_svg(const EvalReport& report);

struct FeatureWeight {
  double coefficient = 0;
  std::string term;
};

struct FeatureReport {
  std::vector<FeatureWeight> negative;  // most low-impact indicative first
  std::vector<FeatureWeight> positive;  // most high-impact indicative first
  std::vector<std::string> flagged_venue_terms;
};

/// Most negative and most positive linear weights mapped back to terms. Ties
/// are broken lexicographically by term.
FeatureReport top_features(const SvmModel& model, const Vocabulary& vocabulary, std::size_t n = 20,
                           const std::vector<std::string>& venue_watchlist = {"acm", "arxiv", "ieee"});
std::string format_feature_report(const FeatureReport& report);

}  // namespace impact
