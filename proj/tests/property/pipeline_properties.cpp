#include <gtest/gtest.h>

#include "impact/pipeline.hpp"
#include "impact/synthetic.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::TempDir;

TEST(PipelineProperties, ExperimentIsBitReproducible) {
  TempDir dir("repro");
  SyntheticOptions so;
  so.documents = 64;
  so.seed = 5;
  const auto corpus = generate_synthetic_corpus(dir / "corpus", so, 2);
  auto manifest = parse_manifest(corpus.manifest, corpus.root);
  RunConfig config;
  config.seed = 5;
  config.k = 12;
  apply_split(manifest, split_corpus(manifest, config.ratios, config.seed));

  std::vector<std::string> bytes;
  for (int jobs : {1, 3}) {
    const auto store = extract_features(manifest, config, jobs);
    const auto report = run_experiment("cs", "medical", manifest, store, config, jobs);
    const auto out = dir / ("reports-" + std::to_string(jobs));
    std::string all;
    for (const auto& f : emit_report(report, out)) all += f.filename().string() + "\n" + testing::read_file(f);
    bytes.push_back(all);
  }
  ASSERT_FALSE(bytes[0].empty());
  EXPECT_EQ(bytes[0], bytes[1]);
}

}  // namespace
}  // namespace impact
