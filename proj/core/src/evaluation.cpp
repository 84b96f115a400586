#include "impact/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "impact/error.hpp"

namespace impact {

using nlohmann::json;

const ClassifierCurve& EvalReport::classifier(const std::string& name) const {
  for (const auto& c : classifiers) {
    if (c.name == name) return c;
  }
  throw ValidationError("report has no classifier '" + name + "'");
}

std::string report_stem(const EvalReport& report) { return report.train_domain + "_to_" + report.test_domain; }

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "fpr,tpr,threshold\n";
  for (const auto& p : curve.points) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
        << (std::isinf(p.threshold) ? (p.threshold > 0 ? std::string("inf") : std::string("-inf"))
                                    : format_double(p.threshold))
        << '\n';
  }
}

std::string roc_svg(const EvalReport& report) {
  constexpr int kSize = 400;
  constexpr int kMargin = 50;
  constexpr int kPlot = kSize - 2 * kMargin;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  auto px = [&](double v) { return format_double(std::round((kMargin + v * kPlot) * 100) / 100); };
  auto py = [&](double v) { return format_double(std::round((kMargin + (1 - v) * kPlot) * 100) / 100); };
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  svg << "  <title>ROC " << report.train_domain << " to " << report.test_domain << "</title>\n";
  svg << "  <desc>config " << report.config_hash << " seed " << report.seed << " toolkit " << report.toolkit
      << "</desc>\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << kSize << "\" height=\"" << kSize << "\" fill=\"white\"/>\n";
  svg << "  <rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot << "\" height=\"" << kPlot
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
  svg << "  <text x=\"" << kSize / 2 << "\" y=\"" << kSize - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << "False positive rate</text>\n";
  svg << "  <text x=\"15\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 "
      << kSize / 2 << ")\">True positive rate</text>\n";
  for (std::size_t c = 0; c < report.classifiers.size(); ++c) {
    const auto& cc = report.classifiers[c];
    const char* color = kColors[c % 5];
    svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < cc.roc.points.size(); ++i) {
      svg << (i ? " " : "") << px(cc.roc.points[i].fpr) << ',' << py(cc.roc.points[i].tpr);
    }
    svg << "\"/>\n";
    const double auc = std::round(cc.roc.auc * 1000) / 1000;
    svg << "  <text x=\"" << kMargin + kPlot - 5 << "\" y=\"" << kMargin + kPlot - 10 - 15 * static_cast<int>(c)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << cc.name << " (AUC "
        << format_double(auc) << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> emit_report(const EvalReport& report, const std::filesystem::path& dir, bool plot) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RuntimeFailure("cannot create report directory '" + dir.string() + "': " + ec.message());
  const auto stem = report_stem(report);
  std::vector<std::filesystem::path> written;

  const auto jsonl = dir / (stem + ".jsonl");
  {
    std::ofstream out(jsonl, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write report '" + jsonl.string() + "'");
    json head = {{"record", "experiment"},
                 {"train_domain", report.train_domain},
                 {"test_domain", report.test_domain},
                 {"n_train", report.n_train},
                 {"n_dev", report.n_dev},
                 {"n_test", report.n_test},
                 {"vocabulary_size", report.vocabulary_size},
                 {"k", report.k},
                 {"a_text", report.auc_text_weight},
                 {"a_visual", report.auc_visual_weight},
                 {"gamma", report.gamma},
                 {"seed", report.seed},
                 {"config_hash", report.config_hash},
                 {"toolkit", report.toolkit},
                 {"protocol", report.protocol}};
    out << head.dump() << '\n';
    for (const auto& c : report.classifiers) {
      json row = {{"record", "classifier"}, {"name", c.name},          {"auc", c.roc.auc},
                  {"headline", c.headline}, {"positives", c.roc.positives}, {"negatives", c.roc.negatives},
                  {"roc_points", c.roc.points.size()}, {"roc_table", stem + "." + c.name + ".roc.csv"}};
      out << row.dump() << '\n';
    }
    for (const auto& g : report.gamma_sweep) {
      json row = {{"record", "gamma_sweep"}, {"gamma", g.gamma}, {"accuracy", g.accuracy}, {"auc", g.auc}};
      out << row.dump() << '\n';
    }
    if (!out) throw RuntimeFailure("failed writing '" + jsonl.string() + "'");
  }
  written.push_back(jsonl);

  for (const auto& c : report.classifiers) {
    const auto csv = dir / (stem + "." + c.name + ".roc.csv");
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write ROC table '" + csv.string() + "'");
    write_roc_csv(out, c.roc);
    written.push_back(csv);
  }
  if (plot) {
    const auto svg = dir / (stem + ".roc.svg");
    std::ofstream out(svg, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write ROC plot '" + svg.string() + "'");
    out << roc_svg(report);
    written.push_back(svg);
  }
  return written;
}

EvalReport read_report(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl, std::ios::binary);
  if (!in) throw ValidationError("cannot read report '" + jsonl.string() + "'");
  EvalReport r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto kind = row.at("record").get<std::string>();
    if (kind == "experiment") {
      r.train_domain = row.at("train_domain");
      r.test_domain = row.at("test_domain");
      r.n_train = row.at("n_train");
      r.n_dev = row.at("n_dev");
      r.n_test = row.at("n_test");
      r.vocabulary_size = row.at("vocabulary_size");
      r.k = row.at("k");
      r.auc_text_weight = row.at("a_text");
      r.auc_visual_weight = row.at("a_visual");
      r.gamma = row.at("gamma");
      r.seed = row.at("seed");
      r.config_hash = row.at("config_hash");
      r.toolkit = row.at("toolkit");
      r.protocol = row.at("protocol");
    } else if (kind == "classifier") {
      ClassifierCurve c;
      c.name = row.at("name");
      c.roc.auc = row.at("auc");
      c.headline = row.at("headline");
      c.roc.positives = row.at("positives");
      c.roc.negatives = row.at("negatives");
      r.classifiers.push_back(std::move(c));
    } else if (kind == "gamma_sweep") {
      r.gamma_sweep.push_back({row.at("gamma"), row.at("accuracy"), row.at("auc")});
    }
  }
  return r;
}

FeatureReport top_features(const SvmModel& model, const Vocabulary& vocabulary, std::size_t n,
                           const std::vector<std::string>& venue_watchlist) {
  if (model.kernel.kind != KernelKind::Linear) throw ValidationError("top_features: model is not linear");
  if (!model.feature_space.starts_with("text:") && !model.feature_space.empty()) {
    throw ValidationError("top_features: model was trained on '" + model.feature_space + "', not text features");
  }
  if (model.dim != vocabulary.size() || model.weights.size() != vocabulary.size()) {
    throw ValidationError("top_features: model dimension does not match the vocabulary");
  }
  if (!model.feature_space.empty() && model.feature_space != vocabulary.fingerprint()) {
    throw ValidationError("top_features: model and vocabulary fingerprints differ");
  }
  std::vector<FeatureWeight> all;
  all.reserve(vocabulary.size());
  for (std::size_t i = 0; i < vocabulary.size(); ++i) all.push_back({model.weights[i], vocabulary.term(i)});
  const std::size_t take = std::min(n, all.size());

  FeatureReport report;
  auto ascending = [](const FeatureWeight& a, const FeatureWeight& b) {
    return a.coefficient != b.coefficient ? a.coefficient < b.coefficient : a.term < b.term;
  };
  auto descending = [](const FeatureWeight& a, const FeatureWeight& b) {
    return a.coefficient != b.coefficient ? a.coefficient > b.coefficient : a.term < b.term;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), ascending);
  report.negative.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), descending);
  report.positive.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));

  for (const auto& venue : venue_watchlist) {
    auto hit = [&](const FeatureWeight& f) { return f.term == venue; };
    if (std::any_of(report.negative.begin(), report.negative.end(), hit) ||
        std::any_of(report.positive.begin(), report.positive.end(), hit)) {
      report.flagged_venue_terms.push_back(venue);
    }
  }
  return report;
}

std::string format_feature_report(const FeatureReport& report) {
  std::ostringstream out;
  out << "# low-impact coefficient\tterm\thigh-impact coefficient\tterm\n";
  const std::size_t rows = std::max(report.negative.size(), report.positive.size());
  char buf[64];
  for (std::size_t i = 0; i < rows; ++i) {
    if (i < report.negative.size()) {
      std::snprintf(buf, sizeof buf, "%.4f", report.negative[i].coefficient);
      out << buf << '\t' << report.negative[i].term;
    } else {
      out << '\t';
    }
    out << '\t';
    if (i < report.positive.size()) {
      std::snprintf(buf, sizeof buf, "%.4f", report.positive[i].coefficient);
      out << buf << '\t' << report.positive[i].term;
    } else {
      out << '\t';
    }
    out << '\n';
  }
  for (const auto& v : report.flagged_venue_terms) out << "# venue term among top features: " << v << '\n';
  return out.str();
}

}  // namespace impact
