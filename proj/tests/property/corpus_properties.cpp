#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "impact/corpus.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::Gen;

TEST(CorpusProperties, LabelBandsPartitionNonNegativeIntegers) {
  Gen g(1);
  for (int t = 0; t < 20000; ++t) {
    const std::int64_t c = t < 100 ? t : g.integer(0, std::int64_t{1} << 40);
    const auto d = label_from_citations(c);
    const int bands = (d == LabelDecision::Low) + (d == LabelDecision::High) + (d == LabelDecision::Rejected);
    ASSERT_EQ(bands, 1);
    ASSERT_EQ(d == LabelDecision::Low, c == 0);
    ASSERT_EQ(d == LabelDecision::High, c > 10);
  }
}

CorpusManifest random_manifest(Gen& g) {
  CorpusManifest m;
  const std::vector<std::string> domains{"cs", "medical", "bio"};
  const std::size_t n = g.size(1, 120);
  for (std::size_t i = 0; i < n; ++i) {
    DocumentRecord r;
    r.id = "d" + std::to_string(g.integer(0, 1'000'000)) + "-" + std::to_string(i);
    r.domain = domains[g.size(0, domains.size() - 1)];
    r.label = g.coin() ? Label::High : Label::Low;
    r.citations = *r.label == Label::High ? 20 : 0;
    r.text_path = r.id + ".txt";
    r.page_paths = {r.id + ".png"};
    m.records.push_back(r);
  }
  return m;
}

SplitRatios random_ratios(Gen& g) {
  double a = g.real(0.05, 1), b = g.real(0.05, 1), c = g.real(0.05, 1);
  const double s = a + b + c;
  a /= s, b /= s;
  return {a, b, 1.0 - a - b};
}

TEST(CorpusProperties, SplitIgnoresManifestOrder) {
  Gen g(2);
  for (int t = 0; t < 200; ++t) {
    auto m = random_manifest(g);
    const auto ratios = random_ratios(g);
    const auto seed = static_cast<std::uint64_t>(g.integer(0, 1000));
    const auto a = split_corpus(m, ratios, seed);
    std::shuffle(m.records.begin(), m.records.end(), g.engine());
    const auto b = split_corpus(m, ratios, seed);
    ASSERT_EQ(a.by_id, b.by_id);
  }
}

TEST(CorpusProperties, EveryCellMatchesRatiosWithinOne) {
  Gen g(3);
  for (int t = 0; t < 300; ++t) {
    auto m = random_manifest(g);
    const auto ratios = random_ratios(g);
    const auto a = split_corpus(m, ratios, static_cast<std::uint64_t>(t));
    ASSERT_EQ(a.by_id.size(), m.records.size());
    std::map<std::pair<std::string, Label>, std::array<int, 3>> cells;
    for (const auto& r : m.records) ++cells[{r.domain, *r.label}][static_cast<int>(a.by_id.at(r.id))];
    for (const auto& [key, counts] : cells) {
      const double n = counts[0] + counts[1] + counts[2];
      const double want[3] = {ratios.train, ratios.dev, ratios.test};
      for (int s = 0; s < 3; ++s) ASSERT_LE(std::abs(counts[s] - std::round(want[s] * n)), 1.0);
    }
  }
}

}  // namespace
}  // namespace impact
