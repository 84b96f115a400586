#include "impact/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "impact/error.hpp"
#include "impact/run_config.hpp"
#include "impact/hashing.hpp"
#include "impact/image.hpp"
#include "impact/parallel.hpp"
#include "impact/rng.hpp"

namespace impact {

using nlohmann::json;

std::string_view to_string(Label label) { return label == Label::High ? "high" : "low"; }

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

Label parse_label(std::string_view text) {
  if (text == "high") return Label::High;
  if (text == "low") return Label::Low;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "dev") return Split::Dev;
  if (text == "test") return Split::Test;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

LabelDecision label_from_citations(std::int64_t citations) {
  if (citations == 0) return LabelDecision::Low;
  if (citations > 10) return LabelDecision::High;
  return LabelDecision::Rejected;
}

std::map<std::pair<std::string, Label>, std::size_t> CorpusManifest::label_counts() const {
  std::map<std::pair<std::string, Label>, std::size_t> counts;
  for (const auto& r : records) {
    if (r.label) ++counts[{r.domain, *r.label}];
  }
  return counts;
}

std::vector<std::string> CorpusManifest::domains() const {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.domain);
  return {seen.begin(), seen.end()};
}

namespace {

const std::set<std::string> kManifestFields = {"id", "domain", "year", "citations", "text", "pages"};

std::string where(std::size_t line, std::string_view field) {
  return "line " + std::to_string(line) + ": field '" + std::string(field) + "'";
}

}  // namespace

CorpusManifest parse_manifest_text(std::string_view text, const std::filesystem::path& root) {
  CorpusManifest manifest;
  manifest.root = root;
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> first_line_of;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (nl == text.size()) break;
      continue;
    }

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      problems.push_back("line " + std::to_string(line_no) + ": malformed record (" + e.what() + ")");
      continue;
    }
    if (!obj.is_object()) {
      problems.push_back("line " + std::to_string(line_no) + ": record is not an object");
      continue;
    }

    std::size_t before = problems.size();
    for (const auto& [key, _] : obj.items()) {
      if (!kManifestFields.count(key)) problems.push_back(where(line_no, key) + " is not a manifest field");
    }
    for (const auto& field : kManifestFields) {
      if (!obj.contains(field)) problems.push_back(where(line_no, field) + " is missing");
    }
    if (problems.size() != before) continue;

    DocumentRecord rec;
    rec.line = line_no;
    if (obj["id"].is_string() && !obj["id"].get<std::string>().empty()) {
      rec.id = obj["id"].get<std::string>();
    } else {
      problems.push_back(where(line_no, "id") + " must be a non-empty string");
    }
    if (obj["domain"].is_string() && !obj["domain"].get<std::string>().empty()) {
      rec.domain = obj["domain"].get<std::string>();
    } else {
      problems.push_back(where(line_no, "domain") + " must be a non-empty string");
    }
    if (obj["year"].is_number_integer()) {
      rec.year = obj["year"].get<int>();
    } else {
      problems.push_back(where(line_no, "year") + " must be an integer");
    }
    if (obj["citations"].is_number_integer() && obj["citations"].get<std::int64_t>() >= 0) {
      rec.citations = obj["citations"].get<std::int64_t>();
    } else {
      problems.push_back(where(line_no, "citations") + " must be a non-negative integer");
    }
    if (obj["text"].is_string() && !obj["text"].get<std::string>().empty()) {
      rec.text_path = obj["text"].get<std::string>();
    } else {
      problems.push_back(where(line_no, "text") + " must be a non-empty path string");
    }
    const auto& pages = obj["pages"];
    if (pages.is_array() && !pages.empty() &&
        std::all_of(pages.begin(), pages.end(), [](const json& p) { return p.is_string() && !p.get<std::string>().empty(); })) {
      for (const auto& p : pages) rec.page_paths.push_back(p.get<std::string>());
    } else {
      problems.push_back(where(line_no, "pages") + " must be a non-empty array of path strings");
    }
    if (problems.size() != before) continue;

    if (auto [it, inserted] = first_line_of.emplace(rec.id, line_no); !inserted) {
      problems.push_back("duplicate id '" + rec.id + "' on lines " + std::to_string(it->second) + " and " +
                         std::to_string(line_no));
      continue;
    }

    switch (label_from_citations(rec.citations)) {
      case LabelDecision::Low: rec.label = Label::Low; break;
      case LabelDecision::High: rec.label = Label::High; break;
      case LabelDecision::Rejected:
        manifest.rejected.push_back({rec.id, rec.citations, line_no});
        continue;
    }
    manifest.records.push_back(std::move(rec));
  }

  if (!problems.empty()) {
    std::string msg = "manifest has " + std::to_string(problems.size()) + " invalid record(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return manifest;
}

CorpusManifest parse_manifest(const std::filesystem::path& path, const std::filesystem::path& root) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read manifest '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_manifest_text(buf.str(), root);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& ratios) {
  const double r[3] = {ratios.train, ratios.dev, ratios.test};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = r[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  // Hand out the leftover items by largest remainder; ties go to the earlier split.
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainder[i] > remainder[best]) best = i;
    }
    ++counts[best];
    remainder[best] = -1.0;
    ++assigned;
  }
  return counts;
}

SplitAssignment split_corpus(const CorpusManifest& manifest, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0)) {
    throw ValidationError("split ratios must all be positive");
  }
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }

  std::map<std::pair<std::string, Label>, std::vector<std::string>> cells;
  for (const auto& r : manifest.records) {
    if (!r.label) throw ValidationError("record '" + r.id + "' is unlabeled; cannot split");
    cells[{r.domain, *r.label}].push_back(r.id);
  }

  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  for (auto& [key, ids] : cells) {
    std::sort(ids.begin(), ids.end());
    Rng rng(mix_seed(seed, key.first + "/" + std::string(to_string(key.second))));
    rng.shuffle(std::span<std::string>(ids));
    const auto counts = apportion(ids.size(), ratios);
    std::size_t i = 0;
    for (; i < counts[0]; ++i) out.by_id[ids[i]] = Split::Train;
    for (; i < counts[0] + counts[1]; ++i) out.by_id[ids[i]] = Split::Dev;
    for (; i < ids.size(); ++i) out.by_id[ids[i]] = Split::Test;
  }
  return out;
}

void apply_split(CorpusManifest& manifest, const SplitAssignment& assignment) {
  for (auto& r : manifest.records) {
    auto it = assignment.by_id.find(r.id);
    if (it == assignment.by_id.end()) throw ValidationError("record '" + r.id + "' has no split assignment");
    r.split = it->second;
  }
}

bool ValidationReport::has_errors() const {
  return std::any_of(issues.begin(), issues.end(), [](const auto& i) { return i.severity == Severity::Error; });
}

ValidationReport validate_corpus(const CorpusManifest& manifest, int jobs) {
  std::vector<std::vector<ValidationIssue>> per_record(manifest.records.size());
  parallel_for(manifest.records.size(), jobs, [&](std::size_t i) {
    const auto& r = manifest.records[i];
    auto& out = per_record[i];
    if (r.year < kFirstYear || r.year > kLastYear) {
      out.push_back({Severity::Warning, r.id, "",
                     "year " + std::to_string(r.year) + " outside " + std::to_string(kFirstYear) + "-" +
                         std::to_string(kLastYear)});
    }
    const auto text = manifest.root / r.text_path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(text, ec)) {
      out.push_back({Severity::Error, r.id, r.text_path, "text file missing"});
    } else {
      std::ifstream in(text, std::ios::binary);
      if (!in) {
        out.push_back({Severity::Error, r.id, r.text_path, "text file unreadable"});
      } else if (std::filesystem::file_size(text, ec) == 0) {
        out.push_back({Severity::Error, r.id, r.text_path, "text file empty"});
      }
    }
    for (const auto& page : r.page_paths) {
      const auto p = manifest.root / page;
      if (!std::filesystem::is_regular_file(p, ec)) {
        out.push_back({Severity::Error, r.id, page, "page image missing"});
      } else if (!is_decodable_image(p)) {
        out.push_back({Severity::Error, r.id, page, "page image unreadable"});
      }
    }
  });
  ValidationReport report;
  for (auto& v : per_record) {
    for (auto& issue : v) report.issues.push_back(std::move(issue));
  }
  return report;
}

void write_corpus_index(const std::filesystem::path& file, const CorpusManifest& manifest,
                        const SplitAssignment& split, const std::string& config_hash) {
  json records = json::array();
  for (const auto& r : manifest.records) {
    json rec = {{"id", r.id},           {"domain", r.domain}, {"year", r.year},
                {"citations", r.citations}, {"text", r.text_path}, {"pages", r.page_paths}};
    if (r.label) rec["label"] = to_string(*r.label);
    auto it = split.by_id.find(r.id);
    if (it != split.by_id.end()) rec["split"] = to_string(it->second);
    records.push_back(std::move(rec));
  }
  json rejected = json::array();
  for (const auto& r : manifest.rejected) {
    rejected.push_back({{"id", r.id}, {"citations", r.citations}, {"line", r.line}});
  }
  json doc = {{"format", "impact-corpus v1"},
              {"config_hash", config_hash},
              {"root", manifest.root.generic_string()},
              {"seed", split.seed},
              {"toolkit", std::string(toolkit_version())},
              {"ratios", {split.ratios.train, split.ratios.dev, split.ratios.test}},
              {"records", records},
              {"rejected", rejected}};
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write corpus index '" + file.string() + "'");
  out << doc.dump(1) << '\n';
}

CorpusManifest read_corpus_index(const std::filesystem::path& file, std::string* config_hash) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot read corpus index '" + file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "impact-corpus v1") {
    throw ValidationError(file.string() + ": not an impact corpus index");
  }
  CorpusManifest m;
  m.root = doc.at("root").get<std::string>();
  if (config_hash) *config_hash = doc.at("config_hash").get<std::string>();
  for (const auto& rec : doc.at("records")) {
    DocumentRecord r;
    r.id = rec.at("id");
    r.domain = rec.at("domain");
    r.year = rec.at("year");
    r.citations = rec.at("citations");
    r.text_path = rec.at("text");
    r.page_paths = rec.at("pages").get<std::vector<std::string>>();
    if (rec.contains("label")) r.label = parse_label(rec["label"].get<std::string>());
    if (rec.contains("split")) r.split = parse_split(rec["split"].get<std::string>());
    m.records.push_back(std::move(r));
  }
  for (const auto& rec : doc.at("rejected")) {
    m.rejected.push_back({rec.at("id"), rec.at("citations"), rec.at("line")});
  }
  return m;
}

}  // namespace impact
