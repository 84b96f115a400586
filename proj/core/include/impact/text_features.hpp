#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "impact/sparse.hpp"

namespace impact {

using TokenList = std::vector<std::string>;

inline constexpr int kYearFilterFirst = 1950;
inline constexpr int kYearFilterLast = 2017;
inline constexpr std::size_t kDefaultMaxTerms = 50000;

/// Lowercases, splits on anything that is not a letter or digit, then drops
/// stop words and bare integers in [1950, 2017]. Input is treated as UTF-8;
/// invalid byte sequences act as separators.
TokenList tokenize(std::string_view text);

/// True for an all-digit token whose value lies in the filtered year range.
bool is_year_token(std::string_view token);

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  std::size_t n_docs() const noexcept { return n_docs_; }

  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(std::size_t column) const { return terms_.at(column); }
  std::uint64_t doc_freq(std::size_t column) const { return doc_freq_.at(column); }
  std::uint64_t corpus_freq(std::size_t column) const { return corpus_freq_.at(column); }

  /// Column id, or -1 if the term was not retained.
  std::int64_t column(std::string_view term) const;

  /// Stable across processes; embedded in models trained on this space.
  std::string fingerprint() const;

  void save(const std::filesystem::path& file, const std::string& provenance = {}) const;
  static Vocabulary load(const std::filesystem::path& file);

  friend Vocabulary build_vocabulary(const std::vector<TokenList>& docs, std::size_t max_terms);

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> doc_freq_;
  std::vector<std::uint64_t> corpus_freq_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::size_t n_docs_ = 0;

  void rebuild_index();
};

/// Keeps the max_terms most frequent terms across the whole collection,
/// ordered by descending corpus frequency with lexicographic tie-break.
Vocabulary build_vocabulary(const std::vector<TokenList>& docs, std::size_t max_terms = kDefaultMaxTerms);

/// ln((1 + n_docs) / (1 + doc_freq)).
double idf(const Vocabulary& vocabulary, std::string_view term);
double idf_at(const Vocabulary& vocabulary, std::size_t column);

struct TextVector {
  SparseVector vector;
  bool zero = false;  // no in-vocabulary term carried weight
};

/// Raw count times idf per retained term, then scaled to unit Euclidean norm.
TextVector tfidf_vector(const TokenList& tokens, const Vocabulary& vocabulary);

}  // namespace impact
