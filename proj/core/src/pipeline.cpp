#include "impact/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/image.hpp"
#include "impact/parallel.hpp"
#include "impact/sift.hpp"

namespace impact {

const DocumentFeatures& FeatureStore::at(const std::string& id) const {
  auto it = docs.find(id);
  if (it == docs.end()) throw ValidationError("no features for document '" + id + "'");
  return it->second;
}

TokenList read_document_tokens(const DocumentRecord& record, const std::filesystem::path& root) {
  const auto path = root / record.text_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("record '" + record.id + "': cannot read text file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return tokenize(buf.str());
}

PointMatrix extract_document_descriptors(const DocumentRecord& record, const std::filesystem::path& root,
                                         const RunConfig& config) {
  std::vector<std::filesystem::path> pages;
  pages.reserve(record.page_paths.size());
  for (const auto& p : record.page_paths) pages.push_back(root / p);
  try {
    const auto image = prepare_document_image(pages, config.page_height);
    return descriptors_of(detect_and_describe(image, config.sift));
  } catch (const ValidationError& e) {
    throw ValidationError("record '" + record.id + "': " + e.what());
  }
}

FeatureStore extract_features(const CorpusManifest& manifest, const RunConfig& config, int jobs, bool visual,
                              const std::filesystem::path& cache) {
  const auto& records = manifest.records;
  std::vector<DocumentFeatures> features(records.size());
  parallel_for(records.size(), jobs,
               [&](std::size_t i) { features[i].tokens = read_document_tokens(records[i], manifest.root); });

  if (visual) {
    Fnv1a corpus_hash;
    for (const auto& r : records) {
      corpus_hash.update(r.id);
      for (const auto& page : r.page_paths) corpus_hash.update(page);
    }
    const auto sift_hash = config.stage_hash("sift") + "-" + corpus_hash.hex();
    bool cached = false;
    if (!cache.empty() && std::filesystem::exists(cache)) {
      std::string hash;
      auto blocks = read_descriptor_cache(cache, &hash);
      if (hash == sift_hash) {
        std::map<std::string, PointMatrix*> by_id;
        for (auto& b : blocks) by_id[b.doc_id] = &b.descriptors;
        cached = std::all_of(records.begin(), records.end(), [&](const auto& r) { return by_id.count(r.id) > 0; });
        if (cached) {
          for (std::size_t i = 0; i < records.size(); ++i) features[i].descriptors = std::move(*by_id[records[i].id]);
        }
      }
    }
    if (!cached) {
      parallel_for(records.size(), jobs, [&](std::size_t i) {
        features[i].descriptors = extract_document_descriptors(records[i], manifest.root, config);
      });
      if (!cache.empty()) {
        std::vector<DescriptorBlock> blocks;
        blocks.reserve(records.size());
        for (std::size_t i = 0; i < records.size(); ++i) blocks.push_back({records[i].id, features[i].descriptors});
        write_descriptor_cache(cache, blocks, sift_hash);
      }
    }
  }

  FeatureStore store;
  for (std::size_t i = 0; i < records.size(); ++i) store.docs.emplace(records[i].id, std::move(features[i]));
  return store;
}

void require_domain(const CorpusManifest& manifest, const std::string& domain) {
  const auto domains = manifest.domains();
  if (domain == kCombinedDomain) {
    if (domains.size() < 2) throw ValidationError("'combined' needs at least two domains in the corpus");
    return;
  }
  if (std::find(domains.begin(), domains.end(), domain) == domains.end()) {
    throw ValidationError("domain '" + domain + "' does not occur in the corpus");
  }
}

std::vector<const DocumentRecord*> documents_in(const CorpusManifest& manifest, const std::string& domain,
                                                Split split) {
  std::vector<const DocumentRecord*> out;
  for (const auto& r : manifest.records) {
    if (!r.split) throw ValidationError("record '" + r.id + "' has no split assignment");
    if (!r.label) throw ValidationError("record '" + r.id + "' has no label");
    if (*r.split == split && (domain == kCombinedDomain || r.domain == domain)) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  return out;
}

int label_sign(const DocumentRecord& record) { return record.label == Label::High ? 1 : -1; }

Vocabulary fit_text_space(const std::vector<const DocumentRecord*>& train, const FeatureStore& store,
                          const RunConfig& config) {
  std::vector<TokenList> docs;
  docs.reserve(train.size());
  for (const auto* r : train) docs.push_back(store.at(r->id).tokens);
  return build_vocabulary(docs, config.max_terms);
}

Dataset text_dataset(const std::vector<const DocumentRecord*>& docs, const FeatureStore& store,
                     const Vocabulary& vocabulary) {
  Dataset data;
  data.dim = vocabulary.size();
  for (const auto* r : docs) data.add(r->id, tfidf_vector(store.at(r->id).tokens, vocabulary).vector, label_sign(*r));
  return data;
}

namespace {

std::vector<SparseVector> bovw_counts(const std::vector<const DocumentRecord*>& docs, const FeatureStore& store,
                                      const CentroidMatrix& centroids, int jobs) {
  std::vector<SparseVector> counts(docs.size());
  parallel_for(docs.size(), jobs,
               [&](std::size_t i) { counts[i] = bovw_vector(store.at(docs[i]->id).descriptors, centroids).counts; });
  return counts;
}

Dataset labelled(const std::vector<const DocumentRecord*>& docs, std::vector<SparseVector> rows, std::size_t dim) {
  Dataset data;
  data.dim = dim;
  for (std::size_t i = 0; i < docs.size(); ++i) data.add(docs[i]->id, std::move(rows[i]), label_sign(*docs[i]));
  return data;
}

}  // namespace

VisualVocabulary fit_visual_space(const std::vector<const DocumentRecord*>& train,
                                  const std::vector<const DocumentRecord*>& dev, const FeatureStore& store,
                                  const RunConfig& config, int jobs, SelectKResult* k_trace) {
  PointMatrix all{kDescriptorSize, {}};
  for (const auto* r : train) {
    const auto& d = store.at(r->id).descriptors;
    all.values.insert(all.values.end(), d.values.begin(), d.values.end());
  }
  if (all.rows() == 0) throw ValidationError("no SIFT descriptors in the training split");
  const auto sample = subsample_rows(all, config.max_cluster_descriptors, mix_seed(config.seed, "cluster-sample"));

  auto build = [&](std::size_t k) {
    KMeansOptions options;
    options.k = k;
    options.seed = mix_seed(config.seed, "kmeans");
    options.max_iters = config.kmeans_max_iters;
    options.tol = config.kmeans_tol;
    options.jobs = jobs;
    VisualVocabulary vocabulary;
    vocabulary.centroids = fit_kmeans(sample, options).centroids;
    vocabulary.standardizer = fit_standardizer(bovw_counts(train, store, vocabulary.centroids, jobs));
    return vocabulary;
  };

  if (!config.select_k) {
    auto vocabulary = build(config.k);
    if (k_trace) *k_trace = {config.k, {}};
    return vocabulary;
  }

  if (dev.empty()) throw ValidationError("k selection needs a non-empty dev split");
  std::map<std::size_t, VisualVocabulary> built;
  auto evaluate = [&](std::size_t k) {
    const auto& vocabulary = built.emplace(k, build(k)).first->second;
    const auto train_data = visual_dataset(train, store, vocabulary, jobs);
    const auto dev_data = visual_dataset(dev, store, vocabulary, jobs);
    const auto model = train_svm(train_data, KernelKind::Gaussian, visual_svm_options(config, jobs));
    std::vector<double> scores(dev_data.size());
    for (std::size_t i = 0; i < dev_data.size(); ++i) scores[i] = decision_value(model, dev_data.x[i]);
    return auc_score(scores, dev_data.y);
  };
  SelectKOptions options{config.k0, 3, config.max_k};
  auto result = select_k(evaluate, count_distinct_rows(sample), options);
  if (k_trace) *k_trace = result;
  return std::move(built.at(result.k));
}

Dataset visual_dataset(const std::vector<const DocumentRecord*>& docs, const FeatureStore& store,
                       const VisualVocabulary& vocabulary, int jobs) {
  auto rows = bovw_counts(docs, store, vocabulary.centroids, jobs);
  for (auto& row : rows) row = vocabulary.standardizer.apply(row);
  return labelled(docs, std::move(rows), vocabulary.k());
}

SvmOptions text_svm_options(const RunConfig& config, int jobs) {
  SvmOptions o;
  o.lambda = config.lambda_text;
  o.tol = config.svm_tol;
  o.seed = config.seed;
  o.jobs = jobs;
  return o;
}

SvmOptions visual_svm_options(const RunConfig& config, int jobs) {
  SvmOptions o;
  o.lambda = config.lambda_visual;
  o.sigma = config.sigma;
  o.tol = config.svm_tol;
  o.seed = config.seed;
  o.jobs = jobs;
  return o;
}

BaseLearner text_learner(const RunConfig& config, const std::string& fingerprint, int jobs) {
  return [options = text_svm_options(config, jobs), folds = config.calibration_folds, fingerprint,
          hash = config.hash()](const Dataset& data) {
    auto model = train_calibrated(data, KernelKind::Linear, options, folds);
    model.feature_space = fingerprint;
    model.config_hash = hash;
    return model;
  };
}

BaseLearner visual_learner(const RunConfig& config, const std::string& fingerprint, int jobs) {
  return [options = visual_svm_options(config, jobs), folds = config.calibration_folds, fingerprint,
          hash = config.hash()](const Dataset& data) {
    auto model = train_calibrated(data, KernelKind::Gaussian, options, folds);
    model.feature_space = fingerprint;
    model.config_hash = hash;
    return model;
  };
}

DevOutputs dev_outputs(const TrainedDomain& trained, const CorpusManifest& manifest, const FeatureStore& store,
                       int jobs) {
  const auto dev = documents_in(manifest, trained.domain, Split::Dev);
  const auto text = text_dataset(dev, store, trained.vocabulary);
  const auto visual = visual_dataset(dev, store, trained.visual_vocabulary, jobs);
  DevOutputs out;
  out.ids = text.ids;
  out.labels = text.y;
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const auto [t, v] = trained.fusion.base_outputs(text.x[i], visual.x[i]);
    out.text.push_back(t);
    out.visual.push_back(v);
  }
  return out;
}

GammaSweep sweep_gamma_on(const FusionModel& fusion, const Dataset& text, const Dataset& visual,
                          const std::vector<double>& grid) {
  if (text.ids != visual.ids) throw ValidationError("gamma sweep: text and visual rows differ");
  std::vector<ProbOutput> t(text.size()), v(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) std::tie(t[i], v[i]) = fusion.base_outputs(text.x[i], visual.x[i]);
  return sweep_gamma(t, v, text.y, fusion.auc_text, fusion.auc_visual, grid.empty() ? default_gamma_grid() : grid);
}

TrainedDomain train_domain(const CorpusManifest& manifest, const FeatureStore& store, const std::string& domain,
                           const RunConfig& config, int jobs) {
  require_domain(manifest, domain);
  const auto train = documents_in(manifest, domain, Split::Train);
  const auto dev = documents_in(manifest, domain, Split::Dev);
  if (train.empty()) throw ValidationError("domain '" + domain + "' has an empty train split");
  if (dev.empty()) throw ValidationError("domain '" + domain + "' has an empty dev split");

  TrainedDomain trained;
  trained.domain = domain;
  trained.n_train = train.size();
  trained.n_dev = dev.size();
  trained.vocabulary = fit_text_space(train, store, config);
  trained.visual_vocabulary = fit_visual_space(train, dev, store, config, jobs, &trained.k_trace);

  const auto text = text_dataset(train, store, trained.vocabulary);
  const auto visual = visual_dataset(train, store, trained.visual_vocabulary, jobs);

  MetaOptions meta;
  meta.folds = config.folds;
  meta.seed = config.seed;
  meta.calibration_folds = config.calibration_folds;
  meta.meta_svm.lambda = config.lambda_meta;
  meta.meta_svm.tol = config.svm_tol;
  meta.meta_svm.seed = config.seed;
  meta.meta_svm.jobs = jobs;
  trained.fusion = train_meta(text, visual, text_learner(config, trained.vocabulary.fingerprint(), jobs),
                              visual_learner(config, trained.visual_vocabulary.fingerprint(), jobs), meta);
  trained.fusion.meta.config_hash = config.hash();
  trained.fusion.meta.seed = config.seed;

  if (config.sweep_gamma) {
    trained.gamma_sweep = sweep_gamma_on(trained.fusion, text_dataset(dev, store, trained.vocabulary),
                                         visual_dataset(dev, store, trained.visual_vocabulary, jobs),
                                         config.gamma_grid);
    trained.fusion.gamma = trained.gamma_sweep.best_gamma;
  } else {
    trained.fusion.gamma = config.gamma;
  }
  return trained;
}

namespace {

std::string protocol_note(const RunConfig& config) {
  std::ostringstream s;
  s << "held-out split stratified by (domain, label) with train/dev/test = " << format_double(config.ratios.train)
    << '/' << format_double(config.ratios.dev) << '/' << format_double(config.ratios.test)
    << "; vocabularies, visual words and all classifiers fit on the training domain's train split; "
       "dev split used for gamma selection; scores from the test domain's test split; "
       "the nonlinear selector is reported but not part of headline comparisons";
  return s.str();
}

}  // namespace

void stamp_report(EvalReport& report, const RunConfig& config) {
  report.seed = config.seed;
  report.config_hash = config.hash();
  report.toolkit = std::string(toolkit_version());
  report.protocol = protocol_note(config);
}

EvalReport evaluate_fusion(const FusionModel& fusion, const Dataset& text, const Dataset& visual,
                           bool include_nonlinear) {
  if (text.ids != visual.ids || text.y != visual.y) throw ValidationError("evaluation: text and visual rows differ");
  const std::size_t n = text.size();
  std::vector<double> s_text(n), s_visual(n), s_meta(n), s_select(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [t, v] = fusion.base_outputs(text.x[i], visual.x[i]);
    s_text[i] = t.logit;
    s_visual[i] = v.logit;
    s_meta[i] = fusion.meta_output(t, v).logit;
    s_select[i] = fusion.select(t, v).p_high;
  }
  EvalReport report;
  report.classifiers = {{"text", roc_auc(s_text, text.y), true},
                        {"visual", roc_auc(s_visual, text.y), true},
                        {"meta", roc_auc(s_meta, text.y), true}};
  if (include_nonlinear) report.classifiers.push_back({"nonlinear", roc_auc(s_select, text.y), false});
  report.n_test = n;
  report.auc_text_weight = fusion.auc_text;
  report.auc_visual_weight = fusion.auc_visual;
  report.gamma = fusion.gamma;
  return report;
}

EvalReport evaluate_domain(const TrainedDomain& trained, const CorpusManifest& manifest, const FeatureStore& store,
                           const std::string& test_domain, const RunConfig& config, int jobs) {
  require_domain(manifest, test_domain);
  const auto test = documents_in(manifest, test_domain, Split::Test);
  if (test.empty()) throw ValidationError("domain '" + test_domain + "' has an empty test split");
  auto report = evaluate_fusion(trained.fusion, text_dataset(test, store, trained.vocabulary),
                                visual_dataset(test, store, trained.visual_vocabulary, jobs));
  report.train_domain = trained.domain;
  report.test_domain = test_domain;
  report.n_train = trained.n_train;
  report.n_dev = trained.n_dev;
  report.vocabulary_size = trained.vocabulary.size();
  report.k = trained.visual_vocabulary.k();
  report.gamma_sweep = trained.gamma_sweep.entries;
  stamp_report(report, config);
  return report;
}

EvalReport run_experiment(const std::string& train_domain_name, const std::string& test_domain,
                          const CorpusManifest& manifest, const FeatureStore& store, const RunConfig& config,
                          int jobs) {
  require_domain(manifest, test_domain);
  const auto trained = train_domain(manifest, store, train_domain_name, config, jobs);
  return evaluate_domain(trained, manifest, store, test_domain, config, jobs);
}

MatrixResult run_matrix(const CorpusManifest& manifest, const FeatureStore& store, const RunConfig& config,
                        const std::vector<std::pair<std::string, std::string>>& pairs, int jobs) {
  if (jobs <= 0) jobs = default_jobs();
  std::vector<std::string> train_domains;
  for (const auto& [train, test] : pairs) {
    require_domain(manifest, train);
    require_domain(manifest, test);
    if (std::find(train_domains.begin(), train_domains.end(), train) == train_domains.end()) {
      train_domains.push_back(train);
    }
  }

  const int outer = std::max(1, std::min(jobs, static_cast<int>(train_domains.size())));
  const int inner = std::max(1, jobs / outer);
  std::vector<TrainedDomain> trained(train_domains.size());
  parallel_for(train_domains.size(), outer,
               [&](std::size_t i) { trained[i] = train_domain(manifest, store, train_domains[i], config, inner); });

  MatrixResult result;
  for (std::size_t i = 0; i < train_domains.size(); ++i) result.trained.emplace(train_domains[i], std::move(trained[i]));
  result.reports.resize(pairs.size());
  const int eval_outer = std::max(1, std::min(jobs, static_cast<int>(pairs.size())));
  parallel_for(pairs.size(), eval_outer, [&](std::size_t i) {
    result.reports[i] = evaluate_domain(result.trained.at(pairs[i].first), manifest, store, pairs[i].second, config,
                                        std::max(1, jobs / eval_outer));
  });
  return result;
}

std::vector<std::pair<std::string, std::string>> standard_pairs(const std::vector<std::string>& domains) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& d : domains) pairs.emplace_back(d, d);
  if (domains.size() >= 2) pairs.emplace_back(kCombinedDomain, kCombinedDomain);
  for (const auto& a : domains) {
    for (const auto& b : domains) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

void write_feature_dump(const std::filesystem::path& file, const FeatureDump& dump) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write feature dump '" + file.string() + "'");
  out << "# impact-features v1 kind=" << dump.kind << " fingerprint=" << dump.fingerprint
      << " config=" << dump.config_hash << " seed=" << dump.seed << " toolkit=" << dump.toolkit
      << " dim=" << dump.data.dim << " rows=" << dump.data.size() << '\n';
  for (std::size_t i = 0; i < dump.data.size(); ++i) {
    out << (dump.data.y[i] > 0 ? "high " : "low ") << format_sparse_row(dump.data.ids[i], dump.data.x[i]) << '\n';
  }
  if (!out) throw RuntimeFailure("failed writing '" + file.string() + "'");
}

FeatureDump read_feature_dump(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot read feature dump '" + file.string() + "'");
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# impact-features v1 ")) {
    throw ValidationError(file.string() + ": missing 'impact-features v1' header");
  }
  FeatureDump dump;
  std::map<std::string, std::string> fields;
  std::istringstream head(line.substr(21));
  std::string kv;
  while (head >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError(file.string() + ": malformed header field '" + kv + "'");
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const char* key : {"kind", "fingerprint", "config", "seed", "toolkit", "dim", "rows"}) {
    if (!fields.count(key)) throw ValidationError(file.string() + ": header lacks '" + key + "'");
  }
  dump.kind = fields["kind"];
  dump.fingerprint = fields["fingerprint"];
  dump.config_hash = fields["config"];
  dump.toolkit = fields["toolkit"];
  try {
    dump.seed = std::stoull(fields["seed"]);
    dump.data.dim = std::stoull(fields["dim"]);
  } catch (const std::exception&) {
    throw ValidationError(file.string() + ": malformed seed or dim in header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    const auto label = line.substr(0, sp);
    if (sp == std::string::npos || (label != "high" && label != "low")) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) + ": expected 'high' or 'low' label");
    }
    std::string id;
    SparseVector v;
    try {
      v = parse_sparse_row(line.substr(sp + 1), dump.data.dim, id);
    } catch (const ValidationError& e) {
      throw ValidationError(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    dump.data.add(id, std::move(v), label == "high" ? 1 : -1);
  }
  if (std::to_string(dump.data.size()) != fields["rows"]) {
    throw ValidationError(file.string() + ": row count does not match the header");
  }
  return dump;
}

}  // namespace impact
