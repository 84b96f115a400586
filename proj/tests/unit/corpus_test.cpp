#include <gtest/gtest.h>

#include <algorithm>

#include "impact/corpus.hpp"
#include "impact/error.hpp"
#include "impact/image.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::TempDir;
using testing::write_file;

std::string record(const std::string& id, std::int64_t citations, const std::string& domain = "cs",
                   int year = 2005) {
  return R"({"id":")" + id + R"(","domain":")" + domain + R"(","year":)" + std::to_string(year) +
         R"(,"citations":)" + std::to_string(citations) + R"(,"text":"t/)" + id + R"(.txt","pages":["p/)" + id +
         R"(.png"]})";
}

std::string error_of(std::string_view text) {
  try {
    parse_manifest_text(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

TEST(LabelFromCitations, Bands) {
  EXPECT_EQ(label_from_citations(0), LabelDecision::Low);
  EXPECT_EQ(label_from_citations(11), LabelDecision::High);
  EXPECT_EQ(label_from_citations(5), LabelDecision::Rejected);
  EXPECT_EQ(label_from_citations(1), LabelDecision::Rejected);
  EXPECT_EQ(label_from_citations(10), LabelDecision::Rejected);
}

TEST(ParseManifest, EmptyFileHasNoRecords) {
  auto m = parse_manifest_text("");
  EXPECT_TRUE(m.records.empty());
  EXPECT_TRUE(parse_manifest_text("\n  \n").records.empty());
}

TEST(ParseManifest, NegativeCitationsNamesFieldAndLine) {
  const auto msg = error_of(record("a", 0) + "\n" + record("b", -1) + "\n");
  EXPECT_NE(msg.find("citations"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(ParseManifest, DuplicateIdCitesBothLines) {
  const auto msg = error_of(record("p1", 0) + "\n" + record("x", 0) + "\n" + record("p1", 20) + "\n");
  EXPECT_NE(msg.find("duplicate id 'p1'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lines 1 and 3"), std::string::npos) << msg;
}

TEST(ParseManifest, CollectsEveryProblem) {
  const auto msg = error_of("{not json\n" + record("a", -3) + "\n" R"({"id":"z"})" "\n");
  EXPECT_NE(msg.find("line 1"), std::string::npos);
  EXPECT_NE(msg.find("line 2"), std::string::npos);
  EXPECT_NE(msg.find("line 3: field 'pages' is missing"), std::string::npos) << msg;
}

TEST(ParseManifest, RejectsUnknownFieldsAndEmptyPages) {
  EXPECT_NE(error_of(R"({"id":"a","domain":"cs","year":2001,"citations":0,"text":"t","pages":["p"],"venue":"x"})")
                .find("'venue' is not a manifest field"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"id":"a","domain":"cs","year":2001,"citations":0,"text":"t","pages":[]})").find("pages"),
            std::string::npos);
}

TEST(ParseManifest, LabelsAndRejects) {
  auto m = parse_manifest_text(record("lo", 0) + "\n" + record("mid", 7) + "\n" + record("hi", 11) + "\n");
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].id, "lo");
  EXPECT_EQ(*m.records[0].label, Label::Low);
  EXPECT_EQ(*m.records[1].label, Label::High);
  EXPECT_EQ(m.records[1].line, 3u);
  ASSERT_EQ(m.rejected.size(), 1u);
  EXPECT_EQ(m.rejected[0].id, "mid");
  EXPECT_EQ(m.rejected[0].line, 2u);
}

TEST(ParseManifest, MissingFileIsValidationError) {
  EXPECT_THROW(parse_manifest("/nonexistent/manifest.jsonl"), ValidationError);
}

CorpusManifest cells(std::size_t per_cell, const std::vector<std::string>& domains = {"cs"}) {
  std::string text;
  for (const auto& d : domains) {
    for (std::size_t i = 0; i < per_cell; ++i) {
      text += record(d + "-h" + std::to_string(i), 20, d) + "\n";
      text += record(d + "-l" + std::to_string(i), 0, d) + "\n";
    }
  }
  return parse_manifest_text(text);
}

TEST(SplitCorpus, HundredDocsSeven) {
  auto m = cells(50);
  auto a = split_corpus(m, {}, 7);
  std::map<std::pair<Label, Split>, int> counts;
  for (const auto& r : m.records) ++counts[{*r.label, a.by_id.at(r.id)}];
  for (Label l : {Label::High, Label::Low}) {
    const auto cell = [&](Split s) { return counts[std::make_pair(l, s)]; };
    EXPECT_NEAR(cell(Split::Train), 35, 1);
    EXPECT_NEAR(cell(Split::Dev), 7.5, 1);
    EXPECT_NEAR(cell(Split::Test), 7.5, 1);
  }
}

TEST(SplitCorpus, RatiosMustSumToOne) {
  auto m = cells(5);
  EXPECT_THROW(split_corpus(m, {0.5, 0.5, 0.1}, 1), ValidationError);
  EXPECT_THROW(split_corpus(m, {1.0, 0.0, 0.0}, 1), ValidationError);
}

TEST(SplitCorpus, UnlabeledRecordRejected) {
  auto m = cells(5);
  m.records[3].label.reset();
  EXPECT_THROW(split_corpus(m, {}, 1), ValidationError);
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(100, {}), (std::array<std::size_t, 3>{70, 15, 15}));
  const auto ten = apportion(10, {});
  EXPECT_EQ(ten[0], 7u);
  EXPECT_EQ(ten[1] + ten[2], 3u);
  EXPECT_EQ(apportion(3, {0.6, 0.2, 0.2}), (std::array<std::size_t, 3>{2, 1, 0}));
  EXPECT_EQ(apportion(0, {}), (std::array<std::size_t, 3>{0, 0, 0}));
}

TEST(ValidateCorpus, FilesAndYears) {
  TempDir dir("validate");
  write_file(dir / "t/a.txt", "some text");
  write_file(dir / "t/b.txt", "");
  std::filesystem::create_directories(dir / "p");
  save_gray_png(dir / "p/a.png", GrayImage(20, 30, 0.5f));
  write_file(dir / "p/b.png", "not an image");
  auto m = parse_manifest_text(record("a", 0, "cs", 1999) + "\n" + record("b", 20) + "\n" + record("c", 20) + "\n",
                               dir.path());
  auto rep = validate_corpus(m, 2);
  auto has = [&](const std::string& id, Severity s, const std::string& what) {
    return std::any_of(rep.issues.begin(), rep.issues.end(), [&](const ValidationIssue& i) {
      return i.record_id == id && i.severity == s && i.message.find(what) != std::string::npos;
    });
  };
  EXPECT_TRUE(has("a", Severity::Warning, "year 1999"));
  EXPECT_FALSE(has("a", Severity::Error, ""));
  EXPECT_TRUE(has("b", Severity::Error, "text file empty"));
  EXPECT_TRUE(has("b", Severity::Error, "page image unreadable"));
  EXPECT_TRUE(has("c", Severity::Error, "text file missing"));
  EXPECT_TRUE(has("c", Severity::Error, "page image missing"));
  EXPECT_TRUE(rep.has_errors());
  for (const auto& i : rep.issues) {
    if (i.message.find("page image missing") != std::string::npos) EXPECT_EQ(i.path, "p/c.png");
  }
}

TEST(ValidateCorpus, CleanCorpusHasNoIssues) {
  TempDir dir("clean");
  write_file(dir / "t/a.txt", "words");
  std::filesystem::create_directories(dir / "p");
  save_gray_png(dir / "p/a.png", GrayImage(20, 30, 0.5f));
  auto m = parse_manifest_text(record("a", 0), dir.path());
  EXPECT_TRUE(validate_corpus(m).issues.empty());
}

TEST(CorpusIndex, RoundTrip) {
  TempDir dir("index");
  auto m = cells(10, {"cs", "medical"});
  auto a = split_corpus(m, {}, 3);
  apply_split(m, a);
  write_corpus_index(dir / "corpus.json", m, a, "abc123");
  std::string hash;
  auto back = read_corpus_index(dir / "corpus.json", &hash);
  EXPECT_EQ(hash, "abc123");
  ASSERT_EQ(back.records.size(), m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    EXPECT_EQ(back.records[i].id, m.records[i].id);
    EXPECT_EQ(back.records[i].split, m.records[i].split);
    EXPECT_EQ(back.records[i].label, m.records[i].label);
    EXPECT_EQ(back.records[i].page_paths, m.records[i].page_paths);
  }
  EXPECT_EQ(back.domains(), (std::vector<std::string>{"cs", "medical"}));
}

}  // namespace
}  // namespace impact
