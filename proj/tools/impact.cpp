// impact: command-line front end for the citation-impact pipeline.
//
// A workspace directory created by `ingest` holds the run configuration, the
// split corpus index, feature dumps, models and reports. Later commands read
// the stored configuration and apply their own overrides on top of it.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "impact/corpus.hpp"
#include "impact/demo.hpp"
#include "impact/error.hpp"
#include "impact/evaluation.hpp"
#include "impact/fusion.hpp"
#include "impact/learners.hpp"
#include "impact/parallel.hpp"
#include "impact/pipeline.hpp"
#include "impact/run_config.hpp"

namespace fs = std::filesystem;
using namespace impact;

namespace {

struct Workspace {
  fs::path dir;

  fs::path config() const { return dir / "run.cfg"; }
  fs::path index() const { return dir / "corpus.json"; }
  fs::path descriptor_cache() const { return dir / "cache" / "descriptors.bin"; }
  fs::path features(const std::string& domain) const { return dir / "features" / domain; }
  fs::path model(const std::string& domain, const std::string& kind) const {
    return dir / "models" / (domain + "." + kind + ".model");
  }
  fs::path reports() const { return dir / "reports"; }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw RuntimeFailure("cannot write '" + path.string() + "'");
}

std::string provenance(const RunConfig& config, const std::string& stage_hash) {
  return "config " + stage_hash + " seed " + std::to_string(config.seed) + " toolkit " +
         std::string(toolkit_version());
}

// Overrides collected from the command line; unset options leave the stored
// configuration alone.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::vector<double> ratios;
  std::optional<std::size_t> max_terms;
  std::optional<std::size_t> k;
  bool select_k = false;
  std::optional<std::size_t> max_cluster_descriptors;
  std::optional<double> lambda;
  std::optional<double> sigma;
  std::optional<int> folds;
  std::vector<double> gamma_grid;

  void apply(RunConfig& c, const std::string& features = {}) const {
    if (seed) c.seed = *seed;
    if (!ratios.empty()) c.ratios = {ratios.at(0), ratios.at(1), ratios.at(2)};
    if (max_terms) c.max_terms = *max_terms;
    if (k) {
      c.k = *k;
      c.select_k = false;
    }
    if (select_k) c.select_k = true;
    if (max_cluster_descriptors) c.max_cluster_descriptors = *max_cluster_descriptors;
    if (lambda) {
      if (features == "text") c.lambda_text = *lambda;
      else if (features == "visual") c.lambda_visual = *lambda;
      else c.lambda_meta = *lambda;
    }
    if (sigma) c.sigma = *sigma;
    if (folds) c.folds = *folds;
    if (!gamma_grid.empty()) c.gamma_grid = gamma_grid;
  }
};

RunConfig load_config(const Workspace& ws) {
  if (!fs::exists(ws.config())) {
    throw ValidationError("'" + ws.dir.string() + "' is not an impact workspace (no run.cfg); run ingest first");
  }
  return RunConfig::from_canonical_text(read_file(ws.config()));
}

void save_config(const Workspace& ws, const RunConfig& config) { write_file(ws.config(), config.canonical_text()); }

CorpusManifest load_corpus(const Workspace& ws) { return read_corpus_index(ws.index()); }

std::vector<std::string> training_domains(const CorpusManifest& manifest, const std::vector<std::string>& requested) {
  if (!requested.empty()) {
    for (const auto& d : requested) require_domain(manifest, d);
    return requested;
  }
  auto domains = manifest.domains();
  if (domains.size() >= 2) domains.emplace_back(kCombinedDomain);
  return domains;
}

std::vector<const DocumentRecord*> all_documents(const CorpusManifest& manifest) {
  std::vector<const DocumentRecord*> docs;
  for (const auto& r : manifest.records) docs.push_back(&r);
  std::sort(docs.begin(), docs.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return docs;
}

// Rows of `dump` for the given documents, in their order.
Dataset select_rows(const FeatureDump& dump, const std::vector<const DocumentRecord*>& docs, const fs::path& file) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < dump.data.size(); ++i) row_of[dump.data.ids[i]] = i;
  std::vector<std::size_t> rows;
  for (const auto* r : docs) {
    auto it = row_of.find(r->id);
    if (it == row_of.end()) throw ValidationError(file.string() + ": no row for document '" + r->id + "'");
    rows.push_back(it->second);
  }
  return dump.data.subset(rows);
}

FeatureDump load_dump(const Workspace& ws, const std::string& domain, const std::string& kind,
                      const RunConfig& config) {
  const auto file = ws.features(domain) / (kind + ".tsv");
  if (!fs::exists(file)) {
    throw ValidationError("no " + kind + " features for '" + domain + "' (" + file.string() + "); run featurize " +
                          kind + " first");
  }
  auto dump = read_feature_dump(file);
  if (dump.config_hash != config.stage_hash(kind)) {
    throw ValidationError(file.string() + ": built with a different configuration (" + dump.config_hash +
                          " vs " + config.stage_hash(kind) + "); rerun featurize " + kind);
  }
  return dump;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const fs::path& manifest_path, const fs::path& root, const Workspace& ws, const Overrides& ov,
               int jobs) {
  RunConfig config;
  ov.apply(config);
  config.root = root;
  config.manifest = manifest_path;
  auto manifest = parse_manifest(manifest_path, root);
  const auto split = split_corpus(manifest, config.ratios, config.seed);
  apply_split(manifest, split);

  const auto report = validate_corpus(manifest, jobs);
  std::size_t errors = 0;
  for (const auto& issue : report.issues) {
    const bool error = issue.severity == Severity::Error;
    errors += error;
    std::cerr << (error ? "error: " : "warning: ") << issue.record_id << ": "
              << (issue.path.empty() ? "" : issue.path + ": ") << issue.message << '\n';
  }
  if (errors > 0) throw ValidationError(std::to_string(errors) + " record(s) failed validation");

  fs::create_directories(ws.dir);
  write_corpus_index(ws.index(), manifest, split, config.hash());
  save_config(ws, config);

  std::cout << "ingested " << manifest.records.size() << " records (" << manifest.rejected.size()
            << " dropped with 1-10 citations)\n";
  for (const auto& [key, count] : manifest.label_counts()) {
    std::cout << "  " << key.first << ' ' << to_string(key.second) << ' ' << count << '\n';
  }
  std::cout << "workspace " << ws.dir.string() << " config " << config.hash() << '\n';
  return 0;
}

int cmd_featurize(const std::string& kind, const Workspace& ws, const std::vector<std::string>& requested,
                  const Overrides& ov, bool force, int jobs) {
  auto config = load_config(ws);
  ov.apply(config);
  save_config(ws, config);
  const auto manifest = load_corpus(ws);
  const auto domains = training_domains(manifest, requested);
  const auto docs = all_documents(manifest);
  const auto stage = config.stage_hash(kind);

  const bool visual = kind == "visual";
  std::optional<FeatureStore> store;
  for (const auto& domain : domains) {
    const auto dir = ws.features(domain);
    const auto dump_file = dir / (kind + ".tsv");
    if (!force && fs::exists(dump_file)) {
      const auto existing = read_feature_dump(dump_file);
      if (existing.config_hash == stage && existing.toolkit == toolkit_version()) {
        std::cout << kind << " features for " << domain << ": cached (" << stage << ")\n";
        continue;
      }
    }
    if (!store) {
      fs::create_directories(ws.descriptor_cache().parent_path());
      store = extract_features(manifest, config, jobs, visual, visual ? ws.descriptor_cache() : fs::path{});
    }
    const auto train = documents_in(manifest, domain, Split::Train);
    if (train.empty()) throw ValidationError("domain '" + domain + "' has an empty train split");
    fs::create_directories(dir);

    FeatureDump dump;
    dump.kind = kind;
    dump.config_hash = stage;
    dump.seed = config.seed;
    dump.toolkit = std::string(toolkit_version());
    if (!visual) {
      const auto vocabulary = fit_text_space(train, *store, config);
      vocabulary.save(dir / "vocabulary.tsv", provenance(config, stage));
      dump.fingerprint = vocabulary.fingerprint();
      dump.data = text_dataset(docs, *store, vocabulary);
      std::cout << "text features for " << domain << ": " << vocabulary.size() << " terms from " << train.size()
                << " training documents\n";
    } else {
      SelectKResult trace;
      const auto dev = documents_in(manifest, domain, Split::Dev);
      const auto vocabulary = fit_visual_space(train, dev, *store, config, jobs, &trace);
      vocabulary.save(dir / "visual_vocabulary.txt", provenance(config, stage));
      dump.fingerprint = vocabulary.fingerprint();
      dump.data = visual_dataset(docs, *store, vocabulary, jobs);
      std::cout << "visual features for " << domain << ": k = " << vocabulary.k();
      if (!trace.trace.empty()) {
        std::cout << " (dev AUC by k:";
        for (const auto& [k, auc] : trace.trace) std::cout << ' ' << k << '=' << format_double(auc);
        std::cout << ')';
      }
      std::cout << '\n';
    }
    write_feature_dump(dump_file, dump);
  }
  return 0;
}

int cmd_train(const std::string& features, const std::string& domain, const Workspace& ws, const Overrides& ov,
              int jobs) {
  auto config = load_config(ws);
  ov.apply(config, features);
  save_config(ws, config);
  const auto manifest = load_corpus(ws);
  require_domain(manifest, domain);
  const auto train = documents_in(manifest, domain, Split::Train);
  if (train.empty()) throw ValidationError("domain '" + domain + "' has an empty train split");
  fs::create_directories(ws.model(domain, features).parent_path());

  auto rows = [&](const std::string& kind, FeatureDump& dump) {
    dump = load_dump(ws, domain, kind, config);
    return select_rows(dump, train, ws.features(domain) / (kind + ".tsv"));
  };

  if (features == "text" || features == "visual") {
    FeatureDump dump;
    const auto data = rows(features, dump);
    const auto learner = features == "text" ? text_learner(config, dump.fingerprint, jobs)
                                            : visual_learner(config, dump.fingerprint, jobs);
    const auto model = learner(data);
    save_model(ws.model(domain, features).string(), model);
    std::cout << features << " model for " << domain << ": " << data.size() << " documents, C = "
              << format_double(model.C) << ", cross-validated AUC " << format_double(model.auc_estimate) << '\n';
    return 0;
  }

  FeatureDump text_dump, visual_dump;
  const auto text = rows("text", text_dump);
  const auto visual = rows("visual", visual_dump);
  MetaOptions meta;
  meta.folds = config.folds;
  meta.seed = config.seed;
  meta.calibration_folds = config.calibration_folds;
  meta.meta_svm.lambda = config.lambda_meta;
  meta.meta_svm.tol = config.svm_tol;
  meta.meta_svm.seed = config.seed;
  meta.meta_svm.jobs = jobs;
  auto fusion = train_meta(text, visual, text_learner(config, text_dump.fingerprint, jobs),
                           visual_learner(config, visual_dump.fingerprint, jobs), meta);
  fusion.meta.config_hash = config.hash();
  fusion.meta.seed = config.seed;
  fusion.gamma = config.gamma;
  save_fusion_model(ws.model(domain, "fusion").string(), fusion);
  std::cout << "meta model for " << domain << ": out-of-fold AUC text " << format_double(fusion.auc_text)
            << ", visual " << format_double(fusion.auc_visual) << '\n';
  return 0;
}

void print_reports(const std::vector<EvalReport>& reports) {
  std::printf("%-10s %-10s %8s %8s %8s %10s\n", "train", "test", "text", "visual", "meta", "nonlinear");
  for (const auto& r : reports) {
    std::printf("%-10s %-10s", r.train_domain.c_str(), r.test_domain.c_str());
    for (const char* name : {"text", "visual", "meta"}) std::printf(" %8.4f", r.auc(name));
    const bool has_nonlinear = std::any_of(r.classifiers.begin(), r.classifiers.end(),
                                           [](const auto& c) { return c.name == "nonlinear"; });
    if (has_nonlinear) {
      std::printf(" %10.4f\n", r.auc("nonlinear"));
    } else {
      std::printf(" %10s\n", "-");
    }
  }
}

int cmd_eval(const std::string& train_domain_name, const std::string& test_domain, const Workspace& ws,
             bool nonlinear, std::optional<double> gamma, bool sweep, bool plot) {
  const auto config = load_config(ws);
  const auto manifest = load_corpus(ws);
  require_domain(manifest, train_domain_name);
  require_domain(manifest, test_domain);
  const auto model_file = ws.model(train_domain_name, "fusion");
  if (!fs::exists(model_file)) {
    throw ValidationError("no meta model for '" + train_domain_name + "' (" + model_file.string() +
                          "); run train --features meta first");
  }
  auto fusion = load_fusion_model(model_file.string());
  const auto text_dump = load_dump(ws, train_domain_name, "text", config);
  const auto visual_dump = load_dump(ws, train_domain_name, "visual", config);
  if (fusion.text.feature_space != text_dump.fingerprint || fusion.visual.feature_space != visual_dump.fingerprint) {
    throw ValidationError(model_file.string() + ": model fingerprints (" + fusion.text.feature_space + ", " +
                          fusion.visual.feature_space + ") do not match the feature dumps (" +
                          text_dump.fingerprint + ", " + visual_dump.fingerprint + ")");
  }
  const auto text_file = ws.features(train_domain_name) / "text.tsv";
  const auto visual_file = ws.features(train_domain_name) / "visual.tsv";

  GammaSweep sweep_result;
  if (sweep) {
    const auto dev = documents_in(manifest, train_domain_name, Split::Dev);
    if (dev.empty()) throw ValidationError("domain '" + train_domain_name + "' has an empty dev split");
    sweep_result = sweep_gamma_on(fusion, select_rows(text_dump, dev, text_file),
                                  select_rows(visual_dump, dev, visual_file), config.gamma_grid);
    fusion.gamma = sweep_result.best_gamma;
  } else if (gamma) {
    fusion.gamma = *gamma;
  }
  FusionConfig{fusion.gamma, fusion.auc_text, fusion.auc_visual}.validate();

  const auto test = documents_in(manifest, test_domain, Split::Test);
  if (test.empty()) throw ValidationError("domain '" + test_domain + "' has an empty test split");
  auto report = evaluate_fusion(fusion, select_rows(text_dump, test, text_file),
                                select_rows(visual_dump, test, visual_file), nonlinear);
  report.train_domain = train_domain_name;
  report.test_domain = test_domain;
  report.n_train = documents_in(manifest, train_domain_name, Split::Train).size();
  report.n_dev = documents_in(manifest, train_domain_name, Split::Dev).size();
  report.vocabulary_size = text_dump.data.dim;
  report.k = visual_dump.data.dim;
  report.gamma_sweep = sweep_result.entries;
  stamp_report(report, config);

  const auto files = emit_report(report, ws.reports(), plot);
  print_reports({report});
  if (sweep) {
    std::cout << "gamma sweep on " << train_domain_name << " dev:";
    for (const auto& e : sweep_result.entries) std::cout << ' ' << format_double(e.gamma) << '=' << format_double(e.accuracy);
    std::cout << " -> " << format_double(sweep_result.best_gamma) << '\n';
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_top_features(const fs::path& model_file, fs::path vocabulary_file, std::size_t n,
                     const std::vector<std::string>& watchlist, const fs::path& out_file) {
  const auto text = read_file(model_file);
  const bool fusion = text.find("\nmodel fusion\n") != std::string::npos;
  const auto model = fusion ? load_fusion_model(model_file.string()).text : load_model(model_file.string());
  if (vocabulary_file.empty()) {
    // <workspace>/models/<domain>.<kind>.model -> <workspace>/features/<domain>/vocabulary.tsv
    const auto stem = model_file.filename().string();
    const auto dot = stem.find('.');
    vocabulary_file = model_file.parent_path().parent_path() / "features" / stem.substr(0, dot) / "vocabulary.tsv";
    if (dot == std::string::npos || !fs::exists(vocabulary_file)) {
      throw UsageError("cannot infer the vocabulary for '" + model_file.string() + "'; pass --vocabulary");
    }
  }
  const auto vocabulary = Vocabulary::load(vocabulary_file);
  const auto report = top_features(model, vocabulary, n, watchlist);
  const auto formatted = "# model " + model_file.string() + " config " + model.config_hash + " seed " +
                         std::to_string(model.seed) + " toolkit " + std::string(toolkit_version()) + "\n" +
                         format_feature_report(report);
  if (out_file.empty()) {
    std::cout << formatted;
  } else {
    write_file(out_file, formatted);
  }
  return 0;
}

int cmd_demo(std::uint64_t seed, const fs::path& out, std::size_t documents, int jobs) {
  auto config = demo_config(seed);
  SyntheticOptions synthetic;
  synthetic.seed = seed;
  synthetic.documents = documents;
  const auto result = run_demo(out, config, synthetic, jobs);
  print_reports(result.matrix.reports);
  for (const auto& [domain, features] : result.top_features) {
    std::cout << domain << " top high-impact terms:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, features.positive.size()); ++i) {
      std::cout << ' ' << features.positive[i].term;
    }
    std::cout << '\n';
  }
  std::cout << "reports in " << (out / "reports").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predict citation impact from paper text and page appearance"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(toolkit_version()));
  int jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads for per-document stages (0: all cores)")
      ->check(CLI::NonNegativeNumber);

  Overrides ov;
  std::string workspace;
  auto add_workspace = [&](CLI::App* sub) {
    sub->add_option("--corpus", workspace, "Workspace directory created by ingest")
        ->envname("IMPACT_WORKSPACE")
        ->required();
  };

  auto* ingest = app.add_subcommand("ingest", "Validate, label and split a corpus manifest");
  std::string manifest, root;
  ingest->add_option("--manifest", manifest, "Line-delimited JSON manifest")->required();
  ingest->add_option("--root", root, "Directory that manifest paths are relative to")->envname("IMPACT_ROOT");
  ingest->add_option("--out", workspace, "Workspace directory to create")->required();
  ingest->add_option("--seed", ov.seed, "Split seed");
  ingest->add_option("--ratios", ov.ratios, "Train,dev,test proportions")->delimiter(',')->expected(3);

  auto* featurize = app.add_subcommand("featurize", "Build cached text or visual feature dumps");
  std::string kind;
  std::vector<std::string> domains;
  bool force = false;
  featurize->add_option("kind", kind, "text or visual")->required()->check(CLI::IsMember({"text", "visual"}));
  add_workspace(featurize);
  featurize->add_option("--train-domain", domains, "Domain(s) to fit on (default: each domain and combined)");
  featurize->add_option("--max-terms", ov.max_terms, "Vocabulary size cap");
  auto* k_opt = featurize->add_option("--k", ov.k, "Number of visual words")->check(CLI::PositiveNumber);
  featurize->add_flag("--select-k", ov.select_k, "Choose k on the dev split")->excludes(k_opt);
  featurize->add_option("--max-cluster-descriptors", ov.max_cluster_descriptors, "Clustering subsample size");
  featurize->add_flag("--force", force, "Ignore cached dumps");

  auto* train = app.add_subcommand("train", "Train base or meta classifiers");
  std::string features, train_domain;
  train->add_option("--features", features, "text, visual or meta")
      ->required()
      ->check(CLI::IsMember({"text", "visual", "meta"}));
  train->add_option("--train-domain", train_domain, "Training domain (or combined)")->required();
  add_workspace(train);
  train->add_option("--lambda", ov.lambda, "Regularization strength (default: C = 1)")->check(CLI::PositiveNumber);
  train->add_option("--sigma", ov.sigma, "Gaussian kernel width (default: median distance)")
      ->check(CLI::PositiveNumber);
  train->add_option("--folds", ov.folds, "Stacking folds for the meta classifier")->check(CLI::Range(2, 100));

  auto* eval = app.add_subcommand("eval", "Evaluate a trained meta model on a test domain");
  std::string test_domain;
  bool nonlinear = false, sweep = false, no_plot = false;
  std::optional<double> gamma;
  eval->add_option("--train-domain", train_domain, "Domain the models were trained on")->required();
  eval->add_option("--test-domain", test_domain, "Domain whose test split is scored")->required();
  add_workspace(eval);
  eval->add_flag("--nonlinear", nonlinear, "Also score the confidence-based selector");
  auto* gamma_opt = eval->add_option("--gamma", gamma, "Text bias for the selector")->check(CLI::Range(0.0, 1e9));
  eval->add_flag("--sweep-gamma", sweep, "Choose gamma on the training domain's dev split")->excludes(gamma_opt);
  eval->add_flag("--no-plot", no_plot, "Skip the SVG plot");

  auto* top = app.add_subcommand("top-features", "Most informative terms of a linear text model");
  std::string model_path, vocabulary_path, top_out;
  std::size_t n = 20;
  std::vector<std::string> watchlist = {"acm", "arxiv", "ieee"};
  top->add_option("--model", model_path, "Text or fusion model file")->required();
  top->add_option("--vocabulary", vocabulary_path, "Vocabulary file (default: from the workspace layout)");
  top->add_option("--n", n, "Terms per list")->check(CLI::PositiveNumber);
  top->add_option("--venue-watchlist", watchlist, "Venue terms to flag")->delimiter(',');
  top->add_option("--out", top_out, "Write to a file instead of stdout");

  auto* demo = app.add_subcommand("demo-synthetic", "Generate the synthetic corpus and run the full matrix");
  std::uint64_t demo_seed = 1;
  std::string demo_out = "impact-demo";
  std::size_t documents = 400;
  demo->add_option("--seed", demo_seed, "Generator and pipeline seed");
  demo->add_option("--out", demo_out, "Output directory");
  demo->add_option("--documents", documents, "Corpus size (multiple of 4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Usage);
  }

  if (gamma && !nonlinear) nonlinear = true;
  if (sweep) nonlinear = true;
  const int workers = jobs == 0 ? default_jobs() : jobs;
  const Workspace ws{workspace};

  try {
    if (ingest->parsed()) {
      const fs::path base = root.empty() ? fs::path(manifest).parent_path() : fs::path(root);
      return cmd_ingest(manifest, base, ws, ov, workers);
    }
    if (featurize->parsed()) return cmd_featurize(kind, ws, domains, ov, force, workers);
    if (train->parsed()) return cmd_train(features, train_domain, ws, ov, workers);
    if (eval->parsed()) return cmd_eval(train_domain, test_domain, ws, nonlinear, gamma, sweep, !no_plot);
    if (top->parsed()) return cmd_top_features(model_path, vocabulary_path, n, watchlist, top_out);
    if (demo->parsed()) return cmd_demo(demo_seed, demo_out, documents, workers);
  } catch (const Error& e) {
    std::cerr << "impact: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "impact: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Runtime);
  }
  return static_cast<int>(ErrorKind::Usage);
}
