#include "impact/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "impact/error.hpp"
#include "impact/learners.hpp"

#ifndef IMPACT_VERSION
#define IMPACT_VERSION "0.0.0"
#endif

namespace impact {

std::vector<std::string> ModelReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (ss >> f) fields.push_back(f);
    if (!fields.empty()) return fields;
  }
  fail("unexpected end of file");
}

std::vector<std::string> ModelReader::expect(const std::string& key, std::size_t arity) {
  auto fields = next();
  if (fields[0] != key) fail("expected '" + key + "', found '" + fields[0] + "'");
  if (fields.size() != arity + 1) fail("'" + key + "' expects " + std::to_string(arity) + " value(s)");
  fields.erase(fields.begin());
  return fields;
}

std::string ModelReader::expect_value(const std::string& key) { return expect(key, 1)[0]; }

void ModelReader::fail(const std::string& message) const {
  throw ValidationError(source_ + ":" + std::to_string(line_) + ": " + message);
}

std::size_t parse_count(const std::string& text) {
  std::size_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("malformed count '" + text + "'");
  }
  return v;
}

namespace {

std::string or_dash(const std::string& s) { return s.empty() ? "-" : s; }
std::string from_dash(const std::string& s) { return s == "-" ? "" : s; }

}  // namespace

void write_model(std::ostream& out, const SvmModel& m) {
  out << kModelMagic << '\n';
  out << "toolkit " << IMPACT_VERSION << '\n';
  out << "config " << or_dash(m.config_hash) << '\n';
  out << "seed " << m.seed << '\n';
  out << "feature_space " << or_dash(m.feature_space) << '\n';
  if (m.kernel.kind == KernelKind::Linear) {
    out << "kernel linear\n";
  } else {
    out << "kernel gaussian " << format_double17(m.kernel.sigma) << '\n';
  }
  out << "dim " << m.dim << '\n';
  out << "lambda " << format_double17(m.lambda) << '\n';
  out << "C " << format_double17(m.C) << '\n';
  out << "bias " << format_double17(m.bias) << '\n';
  if (m.calibrated) {
    out << "platt " << format_double17(m.platt_a) << ' ' << format_double17(m.platt_b) << '\n';
  } else {
    out << "platt none\n";
  }
  out << "auc_estimate " << format_double17(m.auc_estimate) << '\n';
  std::size_t nnz = 0;
  for (double w : m.weights) nnz += w != 0.0;
  out << "weights " << nnz << '\n';
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    if (m.weights[i] != 0.0) out << i << ' ' << format_double17(m.weights[i]) << '\n';
  }
  out << "support_vectors " << m.support_vectors.size() << '\n';
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
    out << format_double17(m.dual_coef[s]);
    for (const auto& e : m.support_vectors[s].entries) out << ' ' << e.index << ':' << format_double17(e.value);
    out << '\n';
  }
  out << "end\n";
}

SvmModel read_model(std::istream& in) {
  ModelReader r(in);
  auto magic = r.next();
  if (magic.size() != 2 || magic[0] + " " + magic[1] != kModelMagic) r.fail("missing 'IMPACT-MODEL v1' header");
  SvmModel m;
  r.expect_value("toolkit");
  m.config_hash = from_dash(r.expect_value("config"));
  m.seed = parse_count(r.expect_value("seed"));
  m.feature_space = from_dash(r.expect_value("feature_space"));
  auto kernel = r.next();
  if (kernel[0] != "kernel") r.fail("expected 'kernel'");
  if (kernel.size() == 2 && kernel[1] == "linear") {
    m.kernel = KernelSpec::linear();
  } else if (kernel.size() == 3 && kernel[1] == "gaussian") {
    m.kernel = KernelSpec::gaussian(parse_double(kernel[2]));
  } else {
    r.fail("unknown kernel");
  }
  m.kernel.validate();
  m.dim = parse_count(r.expect_value("dim"));
  m.lambda = parse_double(r.expect_value("lambda"));
  m.C = parse_double(r.expect_value("C"));
  m.bias = parse_double(r.expect_value("bias"));
  auto platt = r.next();
  if (platt[0] != "platt") r.fail("expected 'platt'");
  if (platt.size() == 3) {
    m.platt_a = parse_double(platt[1]);
    m.platt_b = parse_double(platt[2]);
    m.calibrated = true;
  } else if (!(platt.size() == 2 && platt[1] == "none")) {
    r.fail("malformed 'platt'");
  }
  m.auc_estimate = parse_double(r.expect_value("auc_estimate"));
  const auto nnz = parse_count(r.expect_value("weights"));
  if (m.kernel.kind == KernelKind::Linear) m.weights.assign(m.dim, 0.0);
  for (std::size_t k = 0; k < nnz; ++k) {
    auto row = r.next();
    if (row.size() != 2) r.fail("malformed weight row");
    const auto idx = parse_count(row[0]);
    if (idx >= m.weights.size()) r.fail("weight index out of range");
    m.weights[idx] = parse_double(row[1]);
  }
  const auto nsv = parse_count(r.expect_value("support_vectors"));
  for (std::size_t s = 0; s < nsv; ++s) {
    auto row = r.next();
    m.dual_coef.push_back(parse_double(row[0]));
    SparseVector sv;
    sv.dim = m.dim;
    for (std::size_t k = 1; k < row.size(); ++k) {
      const auto colon = row[k].find(':');
      if (colon == std::string::npos) r.fail("malformed support vector entry");
      sv.entries.push_back({static_cast<std::uint32_t>(parse_count(row[k].substr(0, colon))),
                            parse_double(row[k].substr(colon + 1))});
    }
    sv.validate();
    m.support_vectors.push_back(std::move(sv));
  }
  r.expect("end", 0);
  return m;
}

void save_model(const std::string& path, const SvmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write model '" + path + "'");
  write_model(out, model);
}

SvmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read model '" + path + "'");
  try {
    return read_model(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace impact
