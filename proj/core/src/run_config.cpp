#include "impact/run_config.hpp"

#include <map>
#include <sstream>
#include <thread>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/parallel.hpp"
#include "impact/sparse.hpp"

#ifndef IMPACT_VERSION
#define IMPACT_VERSION "0.0.0"
#endif

namespace impact {

std::string_view toolkit_version() { return IMPACT_VERSION; }

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

namespace {

std::map<std::string, std::string> entries(const RunConfig& c) {
  std::map<std::string, std::string> e;
  e["split.ratios"] = format_double(c.ratios.train) + "," + format_double(c.ratios.dev) + "," + format_double(c.ratios.test);
  e["seed"] = std::to_string(c.seed);
  e["text.max_terms"] = std::to_string(c.max_terms);
  e["sift.octave_layers"] = std::to_string(c.sift.octave_layers);
  e["sift.sigma"] = format_double(c.sift.sigma);
  e["sift.contrast"] = format_double(c.sift.contrast_threshold);
  e["sift.edge"] = format_double(c.sift.edge_threshold);
  e["sift.assumed_blur"] = format_double(c.sift.assumed_blur);
  e["sift.upsample"] = c.sift.upsample ? "1" : "0";
  e["sift.max_octaves"] = std::to_string(c.sift.max_octaves);
  e["visual.page_height"] = std::to_string(c.page_height);
  e["visual.k"] = c.select_k ? "select" : std::to_string(c.k);
  e["visual.k0"] = std::to_string(c.k0);
  e["visual.max_k"] = std::to_string(c.max_k);
  e["visual.max_cluster_descriptors"] = std::to_string(c.max_cluster_descriptors);
  e["visual.kmeans_max_iters"] = std::to_string(c.kmeans_max_iters);
  e["visual.kmeans_tol"] = format_double(c.kmeans_tol);
  e["svm.lambda_text"] = format_double(c.lambda_text);
  e["svm.lambda_visual"] = format_double(c.lambda_visual);
  e["svm.lambda_meta"] = format_double(c.lambda_meta);
  e["svm.sigma"] = format_double(c.sigma);
  e["svm.tol"] = format_double(c.svm_tol);
  e["svm.calibration_folds"] = std::to_string(c.calibration_folds);
  e["fusion.folds"] = std::to_string(c.folds);
  std::string grid;
  for (double g : c.gamma_grid) grid += (grid.empty() ? "" : ",") + format_double(g);
  e["fusion.gamma_grid"] = grid.empty() ? "default" : grid;
  e["fusion.gamma"] = format_double(c.gamma);
  e["fusion.sweep_gamma"] = c.sweep_gamma ? "1" : "0";
  std::string watch;
  for (const auto& w : c.venue_watchlist) watch += (watch.empty() ? "" : ",") + w;
  e["report.venue_watchlist"] = watch;
  return e;
}

}  // namespace

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : entries(*this)) out += k + "=" + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return Fnv1a{}.update(canonical_text()).hex(); }

std::string RunConfig::stage_hash(const std::string& stage) const {
  Fnv1a h;
  h.update(stage);
  for (const auto& [k, v] : entries(*this)) {
    const bool sift = k.starts_with("sift.") || k == "visual.page_height";
    const bool common = k == "seed" || k == "split.ratios";
    bool keep = true;
    if (stage == "sift") keep = sift;
    else if (stage == "text") keep = common || k.starts_with("text.");
    else if (stage == "visual") keep = common || sift || k.starts_with("visual.") || (select_k && k.starts_with("svm."));
    if (keep) h.update(k + "=" + v + "\n");
  }
  return h.hex();
}

namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v.front() == '-') {
    throw ValidationError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_canonical_text(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config: malformed line '" + line + "'");
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    auto i = [&] { return static_cast<int>(to_u64(k, v)); };
    auto z = [&] { return static_cast<std::size_t>(to_u64(k, v)); };
    auto d = [&] { return to_double(k, v); };
    if (k == "split.ratios") {
      const auto parts = split_list(v);
      if (parts.size() != 3) throw ValidationError("config: split.ratios needs three values");
      c.ratios = {to_double(k, parts[0]), to_double(k, parts[1]), to_double(k, parts[2])};
    } else if (k == "seed") c.seed = to_u64(k, v);
    else if (k == "text.max_terms") c.max_terms = z();
    else if (k == "sift.octave_layers") c.sift.octave_layers = i();
    else if (k == "sift.sigma") c.sift.sigma = d();
    else if (k == "sift.contrast") c.sift.contrast_threshold = d();
    else if (k == "sift.edge") c.sift.edge_threshold = d();
    else if (k == "sift.assumed_blur") c.sift.assumed_blur = d();
    else if (k == "sift.upsample") c.sift.upsample = v == "1";
    else if (k == "sift.max_octaves") c.sift.max_octaves = i();
    else if (k == "visual.page_height") c.page_height = i();
    else if (k == "visual.k") {
      c.select_k = v == "select";
      if (!c.select_k) c.k = z();
    } else if (k == "visual.k0") c.k0 = z();
    else if (k == "visual.max_k") c.max_k = z();
    else if (k == "visual.max_cluster_descriptors") c.max_cluster_descriptors = z();
    else if (k == "visual.kmeans_max_iters") c.kmeans_max_iters = i();
    else if (k == "visual.kmeans_tol") c.kmeans_tol = d();
    else if (k == "svm.lambda_text") c.lambda_text = d();
    else if (k == "svm.lambda_visual") c.lambda_visual = d();
    else if (k == "svm.lambda_meta") c.lambda_meta = d();
    else if (k == "svm.sigma") c.sigma = d();
    else if (k == "svm.tol") c.svm_tol = d();
    else if (k == "svm.calibration_folds") c.calibration_folds = i();
    else if (k == "fusion.folds") c.folds = i();
    else if (k == "fusion.gamma_grid") {
      c.gamma_grid.clear();
      if (v != "default") {
        for (const auto& g : split_list(v)) c.gamma_grid.push_back(to_double(k, g));
      }
    } else if (k == "fusion.gamma") c.gamma = d();
    else if (k == "fusion.sweep_gamma") c.sweep_gamma = v == "1";
    else if (k == "report.venue_watchlist") c.venue_watchlist = split_list(v);
    else throw ValidationError("config: unknown key '" + k + "'");
  }
  return c;
}

}  // namespace impact
