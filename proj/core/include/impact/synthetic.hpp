#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "impact/image.hpp"
#include "impact/rng.hpp"

namespace impact {

/// Procedural two-domain corpus with planted text and layout signal.
struct SyntheticOptions {
  std::size_t documents = 400;  // split evenly over the domains and labels
  std::uint64_t seed = 1;
  std::vector<std::string> domains = {"cs", "medical"};
  int pages = 2;
  int page_width = 424;
  int page_height = 600;
  double visual_noise = 0.05;  // share of documents drawn in the other label's style
  double planted_rate = 0.9;   // chance a document carries each token planted for its label
  double leak_rate = 0.04;     // chance it carries each token planted for the other label
};

struct DomainLexicon {
  std::string domain;
  std::vector<std::string> background;  // Zipf-ranked, label-independent
  std::vector<std::string> high_tokens;
  std::vector<std::string> low_tokens;
};

/// Lexicons for the two synthetic domains. Their token sets are disjoint.
std::vector<DomainLexicon> synthetic_lexicons(const SyntheticOptions& options);

std::string synthetic_text(const DomainLexicon& lexicon, bool high, Rng& rng, const SyntheticOptions& options);

/// Dense pages carry two-column text and figure-like drawings; sparse pages
/// are mostly whitespace with one of several loose layouts.
GrayImage render_page(bool dense, int page_index, Rng& rng, int width, int height);

struct SyntheticCorpus {
  std::filesystem::path root;
  std::filesystem::path manifest;
  std::vector<DomainLexicon> lexicons;
};

/// Writes text files, PNG pages and manifest.jsonl under `dir`.
SyntheticCorpus generate_synthetic_corpus(const std::filesystem::path& dir, const SyntheticOptions& options,
                                          int jobs = 1);

}  // namespace impact
