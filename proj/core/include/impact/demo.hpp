#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "impact/evaluation.hpp"
#include "impact/pipeline.hpp"
#include "impact/synthetic.hpp"

namespace impact {

/// Settings used by demo-synthetic; sized for a 400-document corpus.
RunConfig demo_config(std::uint64_t seed);

struct DemoResult {
  SyntheticCorpus corpus;
  CorpusManifest manifest;
  MatrixResult matrix;
  std::map<std::string, FeatureReport> top_features;  // per single training domain
  std::vector<std::filesystem::path> files;           // everything under reports/
};

/// Generates the synthetic corpus under out_dir/corpus, runs the full
/// intra/inter-domain matrix and writes reports, ROC tables, plots, models and
/// feature reports under out_dir/reports.
DemoResult run_demo(const std::filesystem::path& out_dir, const RunConfig& config, const SyntheticOptions& synthetic,
                    int jobs);

}  // namespace impact
