#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace impact {

enum class Label { Low, High };
enum class LabelDecision { Low, High, Rejected };
enum class Split { Train, Dev, Test };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);

/// 0 citations is low impact, more than 10 is high impact; anything in
/// between is excluded from the corpus.
LabelDecision label_from_citations(std::int64_t citations);

struct DocumentRecord {
  std::string id;
  std::string domain;
  int year = 0;
  std::int64_t citations = 0;
  std::string text_path;
  std::vector<std::string> page_paths;
  std::optional<Label> label;
  std::optional<Split> split;
  std::size_t line = 0;  // 1-based manifest line, 0 if synthesized
};

struct RejectedRecord {
  std::string id;
  std::int64_t citations = 0;
  std::size_t line = 0;
};

struct CorpusManifest {
  std::filesystem::path root;
  std::vector<DocumentRecord> records;
  std::vector<RejectedRecord> rejected;  // 1..10 citations, dropped at ingest

  /// (domain, label) -> count, for the balance report.
  std::map<std::pair<std::string, Label>, std::size_t> label_counts() const;
  std::vector<std::string> domains() const;
};

/// Reads a line-delimited manifest. Each non-blank line is a JSON object with
/// exactly the fields id, domain, year, citations, text, pages. All problems
/// in the file are collected and thrown together as one ValidationError.
CorpusManifest parse_manifest(const std::filesystem::path& path, const std::filesystem::path& root = {});
CorpusManifest parse_manifest_text(std::string_view text, const std::filesystem::path& root = {});

struct SplitRatios {
  double train = 0.70;
  double dev = 0.15;
  double test = 0.15;
};

struct SplitAssignment {
  std::map<std::string, Split> by_id;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

/// Stratified by (domain, label). A pure function of the record set: members
/// of every cell are ordered by id before the seeded shuffle, and cell sizes
/// are apportioned with the largest-remainder rule.
SplitAssignment split_corpus(const CorpusManifest& manifest, const SplitRatios& ratios, std::uint64_t seed);

/// Largest-remainder apportionment of n items over the three ratios.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios);

void apply_split(CorpusManifest& manifest, const SplitAssignment& assignment);

enum class Severity { Warning, Error };

struct ValidationIssue {
  Severity severity = Severity::Error;
  std::string record_id;
  std::string path;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool has_errors() const;
};

inline constexpr int kFirstYear = 2000;
inline constexpr int kLastYear = 2013;

ValidationReport validate_corpus(const CorpusManifest& manifest, int jobs = 1);

/// Corpus index written by `ingest`: labeled, split records plus metadata.
void write_corpus_index(const std::filesystem::path& file, const CorpusManifest& manifest,
                        const SplitAssignment& split, const std::string& config_hash);
CorpusManifest read_corpus_index(const std::filesystem::path& file, std::string* config_hash = nullptr);

}  // namespace impact
