#include "impact/demo.hpp"

#include <fstream>

#include "impact/error.hpp"

namespace impact {

RunConfig demo_config(std::uint64_t seed) {
  RunConfig c;
  c.seed = seed;
  c.k = 36;
  c.max_cluster_descriptors = 40000;
  return c;
}

DemoResult run_demo(const std::filesystem::path& out_dir, const RunConfig& base, const SyntheticOptions& synthetic,
                    int jobs) {
  DemoResult result;
  RunConfig config = base;
  result.corpus = generate_synthetic_corpus(out_dir / "corpus", synthetic, jobs);
  config.root = result.corpus.root;
  config.manifest = result.corpus.manifest;
  config.out_dir = out_dir / "reports";

  result.manifest = parse_manifest(config.manifest, config.root);
  const auto split = split_corpus(result.manifest, config.ratios, config.seed);
  apply_split(result.manifest, split);
  const auto validation = validate_corpus(result.manifest, jobs);
  if (validation.has_errors()) {
    const auto& first = validation.issues.front();
    throw ValidationError("synthetic corpus failed validation: " + first.record_id + ": " + first.message);
  }
  write_corpus_index(out_dir / "corpus" / "index.json", result.manifest, split, config.hash());

  const auto store = extract_features(result.manifest, config, jobs, true);
  result.matrix = run_matrix(result.manifest, store, config, standard_pairs(result.manifest.domains()), jobs);

  std::filesystem::create_directories(config.out_dir);
  for (const auto& report : result.matrix.reports) {
    const auto files = emit_report(report, config.out_dir);
    result.files.insert(result.files.end(), files.begin(), files.end());
  }
  for (const auto& [domain, trained] : result.matrix.trained) {
    const auto model = config.out_dir / (domain + ".fusion.model");
    save_fusion_model(model.string(), trained.fusion);
    result.files.push_back(model);
    if (domain == kCombinedDomain) continue;
    auto features = top_features(trained.fusion.text, trained.vocabulary, 20, config.venue_watchlist);
    const auto path = config.out_dir / (domain + ".top_features.tsv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    out << "# config " << config.hash() << " seed " << config.seed << " toolkit " << toolkit_version() << '\n';
    out << format_feature_report(features);
    result.files.push_back(path);
    result.top_features.emplace(domain, std::move(features));
  }
  return result;
}

}  // namespace impact
