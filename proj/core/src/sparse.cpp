#include "impact/sparse.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "impact/error.hpp"

namespace impact {

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.value * e.value;
  return s;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : entries) out[e.index] = e.value;
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v;
  v.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.entries.push_back({static_cast<std::uint32_t>(i), dense[i]});
  }
  return v;
}

void SparseVector::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].index >= dim) throw ValidationError("sparse vector: column id out of range");
    if (entries[i].value == 0.0) throw ValidationError("sparse vector: explicit zero weight");
    if (!std::isfinite(entries[i].value)) throw ValidationError("sparse vector: non-finite weight");
    if (i > 0 && entries[i - 1].index >= entries[i].index) {
      throw ValidationError("sparse vector: column ids not strictly increasing");
    }
  }
}

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->index < ib->index) {
      ++ia;
    } else if (ib->index < ia->index) {
      ++ib;
    } else {
      s += ia->value * ib->value;
      ++ia;
      ++ib;
    }
  }
  return s;
}

double dot(const SparseVector& a, std::span<const double> dense) {
  double s = 0.0;
  for (const auto& e : a.entries) {
    if (e.index < dense.size()) s += e.value * dense[e.index];
  }
  return s;
}

double squared_distance(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() || ib != b.entries.end()) {
    if (ib == b.entries.end() || (ia != a.entries.end() && ia->index < ib->index)) {
      s += ia->value * ia->value;
      ++ia;
    } else if (ia == a.entries.end() || ib->index < ia->index) {
      s += ib->value * ib->value;
      ++ib;
    } else {
      const double d = ia->value - ib->value;
      s += d * d;
      ++ia;
      ++ib;
    }
  }
  return s;
}

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_double17(double value) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("malformed number '" + std::string(text) + "'");
  }
  return v;
}

std::string format_sparse_row(const std::string& doc_id, const SparseVector& v) {
  std::string out = doc_id;
  for (const auto& e : v.entries) {
    out += ' ';
    out += std::to_string(e.index);
    out += ':';
    out += format_double(e.value);
  }
  return out;
}

SparseVector parse_sparse_row(const std::string& line, std::size_t dim, std::string& doc_id) {
  std::istringstream in(line);
  SparseVector v;
  v.dim = dim;
  if (!(in >> doc_id)) throw ValidationError("feature row: missing document id");
  std::string tok;
  while (in >> tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ValidationError("feature row for '" + doc_id + "': bad entry '" + tok + "'");
    std::uint32_t idx = 0;
    auto res = std::from_chars(tok.data(), tok.data() + colon, idx);
    if (res.ec != std::errc{} || res.ptr != tok.data() + colon) {
      throw ValidationError("feature row for '" + doc_id + "': bad column '" + tok + "'");
    }
    v.entries.push_back({idx, parse_double(std::string_view(tok).substr(colon + 1))});
  }
  v.validate();
  return v;
}

}  // namespace impact
