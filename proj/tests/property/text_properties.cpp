#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "impact/stopwords.hpp"
#include "impact/text_features.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::Gen;

std::string random_text(Gen& g) {
  static const std::vector<std::string> pieces = {
      "The", "and", "SVM", "2005", "1949", "2018", "e-print", "Ärger", "naïve", "x", "ΑΒΓ", "...", "!", ",",
      "citation", "OF", "copyright2005", "\xff", "\xe2\x80\x94", "  ", "\n", "1950", "2017", "0042", "3d"};
  std::string out;
  const std::size_t n = g.size(0, 40);
  for (std::size_t i = 0; i < n; ++i) {
    out += g.coin(0.7) ? pieces[g.size(0, pieces.size() - 1)] : g.word(1, 8);
    if (g.coin(0.8)) out += ' ';
  }
  return out;
}

TEST(TextProperties, TokensAreCleanAndRetokenizeToThemselves) {
  Gen g(1);
  for (int t = 0; t < 3000; ++t) {
    const auto tokens = tokenize(random_text(g));
    std::string joined;
    for (const auto& tok : tokens) {
      ASSERT_FALSE(is_stop_word(tok)) << tok;
      ASSERT_FALSE(is_year_token(tok)) << tok;
      for (unsigned char c : tok) {
        ASSERT_FALSE(c < 0x80 && !std::isalnum(c)) << tok;
        ASSERT_FALSE(c >= 'A' && c <= 'Z') << tok;
      }
      joined += tok + " ";
    }
    ASSERT_EQ(tokenize(joined), tokens);
  }
}

std::vector<TokenList> random_corpus(Gen& g) {
  std::vector<TokenList> docs(g.size(1, 25));
  for (auto& d : docs) {
    const std::size_t n = g.size(0, 30);
    for (std::size_t i = 0; i < n; ++i) d.push_back(g.word(1, 2));
  }
  docs[0].push_back("anchor");
  return docs;
}

TEST(TextProperties, VocabularyIgnoresDocumentOrder) {
  Gen g(2);
  for (int t = 0; t < 300; ++t) {
    auto docs = random_corpus(g);
    const auto max_terms = g.size(1, 80);
    const auto a = build_vocabulary(docs, max_terms);
    std::shuffle(docs.begin(), docs.end(), g.engine());
    const auto b = build_vocabulary(docs, max_terms);
    ASSERT_EQ(a.terms(), b.terms());
    ASSERT_EQ(a.fingerprint(), b.fingerprint());
    ASSERT_LE(a.size(), max_terms);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a.doc_freq(i), b.doc_freq(i));
      ASSERT_GE(a.doc_freq(i), 1u);
      if (i > 0) {
        const bool ordered = a.corpus_freq(i - 1) > a.corpus_freq(i) ||
                             (a.corpus_freq(i - 1) == a.corpus_freq(i) && a.term(i - 1) < a.term(i));
        ASSERT_TRUE(ordered) << i;
      }
    }
  }
}

TEST(TextProperties, IdfBoundsAndMonotonicity) {
  Gen g(3);
  for (int t = 0; t < 300; ++t) {
    const auto v = build_vocabulary(random_corpus(g));
    const double n = static_cast<double>(v.n_docs());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double w = idf_at(v, i);
      ASSERT_GE(w, 0.0);
      ASSERT_LE(w, std::log(1 + n) - std::log(2.0) + 1e-15);
      ASSERT_EQ(w == 0.0, v.doc_freq(i) == v.n_docs());
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v.doc_freq(i) <= v.doc_freq(j)) ASSERT_GE(w, idf_at(v, j));
      }
    }
  }
}

TEST(TextProperties, NonZeroVectorsHaveUnitNorm) {
  Gen g(4);
  for (int t = 0; t < 300; ++t) {
    const auto docs = random_corpus(g);
    const auto v = build_vocabulary(docs);
    for (const auto& d : docs) {
      const auto tv = tfidf_vector(d, v);
      tv.vector.validate();
      ASSERT_EQ(tv.zero, tv.vector.empty());
      if (!tv.zero) ASSERT_NEAR(std::sqrt(tv.vector.squared_norm()), 1.0, 1e-9);
    }
  }
}

TEST(TextProperties, RetainedTermsAreNeverStopWordsOrYears) {
  Gen g(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<TokenList> docs;
    for (int d = 0; d < 5; ++d) docs.push_back(tokenize(random_text(g)));
    docs.push_back({"anchor"});
    const auto vocabulary = build_vocabulary(docs);
    for (const auto& term : vocabulary.terms()) {
      ASSERT_FALSE(is_stop_word(term));
      ASSERT_FALSE(is_year_token(term));
    }
  }
}

}  // namespace
}  // namespace impact
