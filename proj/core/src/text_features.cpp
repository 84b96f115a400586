#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "impact/error.hpp"
#include "impact/hashing.hpp"
#include "impact/text_features.hpp"

namespace impact {

std::int64_t Vocabulary::column(std::string_view term) const {
  auto it = index_.find(std::string(term));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

std::string Vocabulary::fingerprint() const {
  Fnv1a h;
  h.update(std::uint64_t{n_docs_});
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    h.update(terms_[i]).update(std::string_view("\0", 1)).update(doc_freq_[i]);
  }
  return "text:" + h.hex();
}

Vocabulary build_vocabulary(const std::vector<TokenList>& docs, std::size_t max_terms) {
  if (max_terms == 0) throw ValidationError("vocabulary: max_terms must be positive");
  struct Counts {
    std::uint64_t corpus = 0;
    std::uint64_t docs = 0;
  };
  std::unordered_map<std::string, Counts> counts;
  std::unordered_map<std::string, std::size_t> last_doc;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      auto& c = counts[tok];
      ++c.corpus;
      auto [it, inserted] = last_doc.try_emplace(tok, d);
      if (inserted || it->second != d) {
        it->second = d;
        ++c.docs;
      }
    }
  }
  if (counts.empty()) throw ValidationError("vocabulary: every document is empty after tokenization");

  std::vector<std::pair<std::string, Counts>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.corpus != b.second.corpus) return a.second.corpus > b.second.corpus;
    return a.first < b.first;
  });
  if (ranked.size() > max_terms) ranked.resize(max_terms);

  Vocabulary v;
  v.n_docs_ = docs.size();
  for (auto& [term, c] : ranked) {
    v.terms_.push_back(term);
    v.doc_freq_.push_back(c.docs);
    v.corpus_freq_.push_back(c.corpus);
  }
  v.rebuild_index();
  return v;
}

void Vocabulary::save(const std::filesystem::path& file, const std::string& provenance) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write vocabulary '" + file.string() + "'");
  out << "# impact-vocabulary v1 n_docs=" << n_docs_ << " terms=" << terms_.size() << " fingerprint=" << fingerprint()
      << '\n';
  if (!provenance.empty()) out << "# " << provenance << '\n';
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    out << terms_[i] << '\t' << doc_freq_[i] << '\t' << corpus_freq_[i] << '\n';
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot read vocabulary '" + file.string() + "'");
  std::string header;
  std::getline(in, header);
  const std::string prefix = "# impact-vocabulary v1 n_docs=";
  if (header.rfind(prefix, 0) != 0) throw ValidationError(file.string() + ": not a vocabulary file");
  Vocabulary v;
  v.n_docs_ = std::stoull(header.substr(prefix.size()));
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.starts_with("#")) continue;
    std::istringstream row(line);
    std::string term;
    std::uint64_t df = 0, cf = 0;
    if (!std::getline(row, term, '\t') || !(row >> df >> cf)) {
      throw ValidationError(file.string() + ": malformed line " + std::to_string(line_no));
    }
    v.terms_.push_back(term);
    v.doc_freq_.push_back(df);
    v.corpus_freq_.push_back(cf);
  }
  v.rebuild_index();
  return v;
}

double idf_at(const Vocabulary& vocabulary, std::size_t column) {
  const double n = static_cast<double>(vocabulary.n_docs());
  const double df = static_cast<double>(vocabulary.doc_freq(column));
  return std::log((1.0 + n) / (1.0 + df));
}

double idf(const Vocabulary& vocabulary, std::string_view term) {
  const auto col = vocabulary.column(term);
  if (col < 0) throw ValidationError("idf: term '" + std::string(term) + "' is not in the vocabulary");
  return idf_at(vocabulary, static_cast<std::size_t>(col));
}

TextVector tfidf_vector(const TokenList& tokens, const Vocabulary& vocabulary) {
  if (vocabulary.empty()) throw ValidationError("tfidf: empty vocabulary");
  std::map<std::uint32_t, std::uint64_t> tf;
  for (const auto& tok : tokens) {
    const auto col = vocabulary.column(tok);
    if (col >= 0) ++tf[static_cast<std::uint32_t>(col)];
  }
  TextVector out;
  out.vector.dim = vocabulary.size();
  double norm2 = 0.0;
  for (const auto& [col, count] : tf) {
    const double w = static_cast<double>(count) * idf_at(vocabulary, col);
    if (w != 0.0) {
      out.vector.entries.push_back({col, w});
      norm2 += w * w;
    }
  }
  if (out.vector.entries.empty()) {
    out.zero = true;
    return out;
  }
  const double norm = std::sqrt(norm2);
  for (auto& e : out.vector.entries) e.value /= norm;
  return out;
}

}  // namespace impact
