#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "impact/corpus.hpp"
#include "impact/learners.hpp"

namespace impact {

/// (text_high, text_low, vis_high, vis_low), each pair scaled by the square
/// root of its classifier's AUC.
struct MetaInput {
  std::array<double, 4> m{};
  SparseVector to_sparse() const;
};

MetaInput meta_features(const ProbOutput& text, double auc_text, const ProbOutput& visual, double auc_visual);

struct FusionConfig {
  double gamma = 0.25;
  double auc_text = 0;
  double auc_visual = 0;
  void validate() const;
};

enum class Source { Text, Visual };
std::string_view to_string(Source source);

struct Selection {
  Label label = Label::Low;
  Source winner = Source::Text;
  double score_text = 0;
  double score_visual = 0;
  double p_high = 0;  // the winning classifier's P(High)
};

/// s_text = max(p) sqrt(a_text) + gamma, s_vis = max(p) sqrt(a_vis); the
/// label comes from whichever classifier scores higher, ties to text.
Selection nonlinear_select(const ProbOutput& text, const ProbOutput& visual, const FusionConfig& config);

struct GammaSweepEntry {
  double gamma = 0;
  double accuracy = 0;
  double auc = 0;
};

struct GammaSweep {
  double best_gamma = 0;
  std::vector<GammaSweepEntry> entries;
};

/// Grid {0, 0.05, ..., 0.30}.
std::vector<double> default_gamma_grid();

/// Picks the grid value with the highest dev accuracy; ties go to the
/// smaller gamma. labels are +1 (High) / -1 (Low).
GammaSweep sweep_gamma(std::span<const ProbOutput> text, std::span<const ProbOutput> visual, std::span<const int> labels,
                       double auc_text, double auc_visual, std::span<const double> grid);

/// Trains one calibrated base model on a subset of the training rows.
using BaseLearner = std::function<SvmModel(const Dataset&)>;

struct StackingTrace {
  std::vector<int> fold_of;                             // per training row
  std::vector<std::vector<std::string>> fold_train_ids;  // ids each fold's base models saw
};

struct FusionModel {
  SvmModel text;
  SvmModel visual;
  double auc_text = 0;    // out-of-fold AUC of the text base classifier
  double auc_visual = 0;
  double gamma = 0.25;
  SvmModel meta;
  StackingTrace trace;

  /// Base outputs for one document, in order (text, visual).
  std::pair<ProbOutput, ProbOutput> base_outputs(const SparseVector& text_x, const SparseVector& visual_x) const;
  ProbOutput meta_output(const ProbOutput& text, const ProbOutput& visual) const;
  Selection select(const ProbOutput& text, const ProbOutput& visual) const;
};

struct MetaOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  SvmOptions meta_svm;  // linear SVM over the 4-d meta inputs
  int calibration_folds = 3;
};

/// Out-of-fold stacking. Both datasets must list the same documents in the
/// same order. Base learners are retrained on every fold and once more on the
/// full training rows for inference.
FusionModel train_meta(const Dataset& text, const Dataset& visual, const BaseLearner& text_learner,
                       const BaseLearner& visual_learner, const MetaOptions& options);

void write_fusion_model(std::ostream& out, const FusionModel& model);
FusionModel read_fusion_model(std::istream& in);
void save_fusion_model(const std::string& path, const FusionModel& model);
FusionModel load_fusion_model(const std::string& path);

}  // namespace impact
