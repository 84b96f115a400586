#include "impact/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/model_io.hpp"
#include "impact/roc.hpp"

namespace impact {

SparseVector MetaInput::to_sparse() const { return SparseVector::from_dense(m); }

MetaInput meta_features(const ProbOutput& text, double auc_text, const ProbOutput& visual, double auc_visual) {
  if (auc_text < 0 || auc_text > 1 || auc_visual < 0 || auc_visual > 1) {
    throw ValidationError("meta_features: AUC weights must lie in [0, 1]");
  }
  const double st = std::sqrt(auc_text);
  const double sv = std::sqrt(auc_visual);
  return {{text.p_high * st, text.p_low * st, visual.p_high * sv, visual.p_low * sv}};
}

void FusionConfig::validate() const {
  if (!(gamma >= 0) || !std::isfinite(gamma)) throw ValidationError("fusion: gamma must be non-negative");
  if (auc_text < 0 || auc_text > 1 || auc_visual < 0 || auc_visual > 1) {
    throw ValidationError("fusion: AUC weights must lie in [0, 1]");
  }
}

std::string_view to_string(Source source) { return source == Source::Text ? "text" : "visual"; }

Selection nonlinear_select(const ProbOutput& text, const ProbOutput& visual, const FusionConfig& config) {
  config.validate();
  Selection s;
  s.score_text = std::max(text.p_high, text.p_low) * std::sqrt(config.auc_text) + config.gamma;
  s.score_visual = std::max(visual.p_high, visual.p_low) * std::sqrt(config.auc_visual);
  const ProbOutput& win = s.score_text >= s.score_visual ? text : visual;
  s.winner = s.score_text >= s.score_visual ? Source::Text : Source::Visual;
  s.label = win.p_high > win.p_low ? Label::High : Label::Low;
  s.p_high = win.p_high;
  return s;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(i / 20.0);
  return grid;
}

GammaSweep sweep_gamma(std::span<const ProbOutput> text, std::span<const ProbOutput> visual, std::span<const int> labels,
                       double auc_text, double auc_visual, std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("sweep_gamma: empty grid");
  if (text.size() != visual.size() || text.size() != labels.size() || text.empty()) {
    throw ValidationError("sweep_gamma: dev outputs must be non-empty and aligned");
  }
  GammaSweep sweep;
  double best_acc = -1;
  bool both = std::any_of(labels.begin(), labels.end(), [](int y) { return y > 0; }) &&
              std::any_of(labels.begin(), labels.end(), [](int y) { return y <= 0; });
  for (double g : grid) {
    FusionConfig cfg{g, auc_text, auc_visual};
    std::size_t correct = 0;
    std::vector<double> scores(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      const auto sel = nonlinear_select(text[i], visual[i], cfg);
      correct += (sel.label == Label::High) == (labels[i] > 0);
      scores[i] = sel.p_high;
    }
    GammaSweepEntry e{g, static_cast<double>(correct) / static_cast<double>(text.size()),
                      both ? auc_score(scores, labels) : 0.5};
    sweep.entries.push_back(e);
    if (e.accuracy > best_acc || (e.accuracy == best_acc && g < sweep.best_gamma)) {
      best_acc = e.accuracy;
      sweep.best_gamma = g;
    }
  }
  return sweep;
}

std::pair<ProbOutput, ProbOutput> FusionModel::base_outputs(const SparseVector& text_x, const SparseVector& visual_x) const {
  return {predict_proba(text, text_x), predict_proba(visual, visual_x)};
}

ProbOutput FusionModel::meta_output(const ProbOutput& t, const ProbOutput& v) const {
  return predict_proba(meta, meta_features(t, auc_text, v, auc_visual).to_sparse());
}

Selection FusionModel::select(const ProbOutput& t, const ProbOutput& v) const {
  return nonlinear_select(t, v, {gamma, auc_text, auc_visual});
}

FusionModel train_meta(const Dataset& text, const Dataset& visual, const BaseLearner& text_learner,
                       const BaseLearner& visual_learner, const MetaOptions& options) {
  if (text.size() != visual.size() || text.ids != visual.ids) {
    throw ValidationError("train_meta: text and visual datasets must cover the same documents in the same order");
  }
  if (text.y != visual.y) throw ValidationError("train_meta: label mismatch between feature sets");
  text.validate();
  visual.validate();

  const std::size_t n = text.size();
  FusionModel model;
  model.trace.fold_of = stratified_folds(text.y, options.folds, mix_seed(options.seed, "stacking-folds"));
  std::vector<ProbOutput> oof_text(n), oof_visual(n);

  for (int k = 0; k < options.folds; ++k) {
    std::vector<std::size_t> train_rows, held_rows;
    for (std::size_t i = 0; i < n; ++i) (model.trace.fold_of[i] == k ? held_rows : train_rows).push_back(i);
    const auto fold_text = text.subset(train_rows);
    const auto fold_visual = visual.subset(train_rows);
    const bool pos = std::count(fold_text.y.begin(), fold_text.y.end(), 1) > 0;
    const bool neg = std::count(fold_text.y.begin(), fold_text.y.end(), -1) > 0;
    if (!pos || !neg) throw ValidationError("train_meta: stacking fold " + std::to_string(k) + " has a single class");
    model.trace.fold_train_ids.push_back(fold_text.ids);
    const auto tm = text_learner(fold_text);
    const auto vm = visual_learner(fold_visual);
    for (auto i : held_rows) {
      oof_text[i] = predict_proba(tm, text.x[i]);
      oof_visual[i] = predict_proba(vm, visual.x[i]);
    }
  }

  std::vector<double> ts(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = oof_text[i].logit;
    vs[i] = oof_visual[i].logit;
  }
  model.auc_text = auc_score(ts, text.y);
  model.auc_visual = auc_score(vs, text.y);

  Dataset meta_data;
  meta_data.dim = 4;
  for (std::size_t i = 0; i < n; ++i) {
    meta_data.add(text.ids[i], meta_features(oof_text[i], model.auc_text, oof_visual[i], model.auc_visual).to_sparse(),
                  text.y[i]);
  }
  SvmOptions meta_opts = options.meta_svm;
  meta_opts.seed = mix_seed(options.seed, "meta-svm");
  model.meta = train_calibrated(meta_data, KernelKind::Linear, meta_opts, options.calibration_folds);
  model.meta.feature_space = "meta:4";

  model.text = text_learner(text);
  model.visual = visual_learner(visual);
  return model;
}

void write_fusion_model(std::ostream& out, const FusionModel& m) {
  out << kModelMagic << '\n';
  out << "model fusion\n";
  out << "text_fingerprint " << (m.text.feature_space.empty() ? "-" : m.text.feature_space) << '\n';
  out << "visual_fingerprint " << (m.visual.feature_space.empty() ? "-" : m.visual.feature_space) << '\n';
  out << "a_text " << format_double17(m.auc_text) << '\n';
  out << "a_visual " << format_double17(m.auc_visual) << '\n';
  out << "gamma " << format_double17(m.gamma) << '\n';
  out << "section text\n";
  write_model(out, m.text);
  out << "section visual\n";
  write_model(out, m.visual);
  out << "section meta\n";
  write_model(out, m.meta);
}

FusionModel read_fusion_model(std::istream& in) {
  ModelReader r(in, "fusion model");
  auto magic = r.next();
  if (magic.size() != 2 || magic[0] + " " + magic[1] != kModelMagic) r.fail("missing 'IMPACT-MODEL v1' header");
  if (r.expect_value("model") != "fusion") r.fail("not a fusion model");
  FusionModel m;
  const auto text_fp = r.expect_value("text_fingerprint");
  const auto visual_fp = r.expect_value("visual_fingerprint");
  m.auc_text = parse_double(r.expect_value("a_text"));
  m.auc_visual = parse_double(r.expect_value("a_visual"));
  m.gamma = parse_double(r.expect_value("gamma"));
  if (r.expect_value("section") != "text") r.fail("expected text section");
  m.text = read_model(in);
  // read_model consumed lines through its own reader; continue with a fresh one.
  ModelReader r2(in, "fusion model");
  if (r2.expect_value("section") != "visual") r2.fail("expected visual section");
  m.visual = read_model(in);
  ModelReader r3(in, "fusion model");
  if (r3.expect_value("section") != "meta") r3.fail("expected meta section");
  m.meta = read_model(in);
  if ((text_fp == "-" ? "" : text_fp) != m.text.feature_space ||
      (visual_fp == "-" ? "" : visual_fp) != m.visual.feature_space) {
    throw ValidationError("fusion model: base fingerprints do not match the embedded models");
  }
  return m;
}

void save_fusion_model(const std::string& path, const FusionModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write model '" + path + "'");
  write_fusion_model(out, model);
}

FusionModel load_fusion_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read model '" + path + "'");
  try {
    return read_fusion_model(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace impact
