#include "impact/visual_features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "impact/error.hpp"
#include "impact/hashing.hpp"

namespace impact {

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw ValidationError("standardizer: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = stdev[d] > 0 ? (x[d] - mean[d]) / stdev[d] : x[d] - mean[d];
  }
  return out;
}

SparseVector Standardizer::apply(const SparseVector& x) const {
  const auto dense = x.to_dense();
  return SparseVector::from_dense(apply(dense));
}

std::vector<std::size_t> Standardizer::constant_dimensions() const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < stdev.size(); ++d) {
    if (stdev[d] == 0) out.push_back(d);
  }
  return out;
}

Standardizer fit_standardizer(const std::vector<std::vector<double>>& train_vectors) {
  if (train_vectors.size() < 2) throw ValidationError("standardizer: need at least 2 training vectors");
  const std::size_t dim = train_vectors.front().size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.stdev.assign(dim, 0.0);
  for (const auto& v : train_vectors) {
    if (v.size() != dim) throw ValidationError("standardizer: ragged training vectors");
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] += v[d];
  }
  const double n = static_cast<double>(train_vectors.size());
  for (auto& m : s.mean) m /= n;
  for (const auto& v : train_vectors) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = v[d] - s.mean[d];
      s.stdev[d] += diff * diff;
    }
  }
  for (auto& sd : s.stdev) sd = std::sqrt(sd / n);
  return s;
}

Standardizer fit_standardizer(const std::vector<SparseVector>& train_vectors) {
  std::vector<std::vector<double>> dense;
  dense.reserve(train_vectors.size());
  for (const auto& v : train_vectors) dense.push_back(v.to_dense());
  return fit_standardizer(dense);
}

std::string VisualVocabulary::fingerprint() const {
  Fnv1a h;
  h.update(std::uint64_t{centroids.dim}).update(std::uint64_t{k()});
  for (double v : centroids.values) h.update(v);
  for (double v : standardizer.mean) h.update(v);
  for (double v : standardizer.stdev) h.update(v);
  return "visual:k" + std::to_string(k()) + ":" + h.hex();
}

void VisualVocabulary::save(const std::filesystem::path& file, const std::string& provenance) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write visual vocabulary '" + file.string() + "'");
  out << "# impact-visual-vocabulary v1\n";
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "k " << k() << "\ndim " << centroids.dim << "\nfingerprint " << fingerprint() << '\n';
  out << "centroids\n";
  for (std::size_t c = 0; c < k(); ++c) {
    const auto row = centroids.row(c);
    for (std::size_t d = 0; d < row.size(); ++d) out << (d ? " " : "") << format_double17(row[d]);
    out << '\n';
  }
  out << "mean\n";
  for (std::size_t d = 0; d < standardizer.mean.size(); ++d) out << (d ? " " : "") << format_double17(standardizer.mean[d]);
  out << "\nstdev\n";
  for (std::size_t d = 0; d < standardizer.stdev.size(); ++d) out << (d ? " " : "") << format_double17(standardizer.stdev[d]);
  out << '\n';
}

namespace {

std::vector<double> read_row(std::istream& in, std::size_t n, const std::string& what) {
  std::vector<double> row(n);
  std::string tok;
  for (auto& v : row) {
    if (!(in >> tok)) throw ValidationError("visual vocabulary: truncated " + what);
    v = parse_double(tok);
  }
  return row;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word) throw ValidationError("visual vocabulary: expected '" + word + "'");
}

}  // namespace

VisualVocabulary VisualVocabulary::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot read visual vocabulary '" + file.string() + "'");
  std::string header;
  std::getline(in, header);
  if (header != "# impact-visual-vocabulary v1") throw ValidationError(file.string() + ": not a visual vocabulary");
  while (in.peek() == '#') std::getline(in, header);
  VisualVocabulary v;
  std::size_t k = 0;
  std::string fp;
  expect(in, "k");
  in >> k;
  expect(in, "dim");
  in >> v.centroids.dim;
  expect(in, "fingerprint");
  in >> fp;
  expect(in, "centroids");
  v.centroids.values = read_row(in, k * v.centroids.dim, "centroids");
  expect(in, "mean");
  v.standardizer.mean = read_row(in, k, "mean");
  expect(in, "stdev");
  v.standardizer.stdev = read_row(in, k, "stdev");
  if (v.fingerprint() != fp) throw ValidationError(file.string() + ": fingerprint mismatch");
  return v;
}

BovwVector bovw_vector(const PointMatrix& descriptors, const CentroidMatrix& centroids) {
  std::vector<double> counts(centroids.rows(), 0.0);
  for (std::size_t i = 0; i < descriptors.rows(); ++i) counts[nearest_centroid(descriptors.row(i), centroids)] += 1.0;
  BovwVector out;
  out.counts = SparseVector::from_dense(counts);
  out.zero = descriptors.rows() == 0;
  return out;
}

SelectKResult select_k(const std::function<double(std::size_t)>& dev_evaluator, std::size_t distinct_points,
                       const SelectKOptions& options) {
  if (options.k0 < 1 || options.factor < 2) throw ValidationError("select_k: need k0 >= 1 and factor >= 2");
  const std::size_t cap = std::min(options.max_k, distinct_points);
  if (options.k0 > cap) throw ValidationError("select_k: k0 exceeds the available distinct descriptors");
  SelectKResult result;
  std::size_t k = options.k0;
  double prev_score = 0;
  while (k <= cap) {
    const double score = dev_evaluator(k);
    result.trace.emplace_back(k, score);
    if (result.trace.size() > 1 && score < prev_score) break;
    result.k = k;
    prev_score = score;
    k *= options.factor;
  }
  return result;
}

PointMatrix descriptors_of(const std::vector<SiftFeature>& features) {
  PointMatrix m{kDescriptorSize, {}};
  m.values.reserve(features.size() * kDescriptorSize);
  for (const auto& f : features) m.append(f.descriptor);
  return m;
}

namespace {

constexpr char kCacheMagic[8] = {'I', 'M', 'P', 'D', 'E', 'S', 'C', '1'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "descriptor cache assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in, const std::string& file) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) throw ValidationError(file + ": truncated descriptor cache");
  return value;
}

}  // namespace

void write_descriptor_cache(const std::filesystem::path& file, const std::vector<DescriptorBlock>& blocks,
                            const std::string& config_hash) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RuntimeFailure("cannot write descriptor cache '" + file.string() + "'");
  out.write(kCacheMagic, sizeof kCacheMagic);
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(config_hash.size()));
  out.write(config_hash.data(), static_cast<std::streamsize>(config_hash.size()));
  put<std::uint64_t>(out, blocks.size());
  for (const auto& b : blocks) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(b.doc_id.size()));
    out.write(b.doc_id.data(), static_cast<std::streamsize>(b.doc_id.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(kDescriptorSize));
    put<std::uint64_t>(out, b.descriptors.rows());
    out.write(reinterpret_cast<const char*>(b.descriptors.values.data()),
              static_cast<std::streamsize>(b.descriptors.values.size() * sizeof(float)));
  }
}

std::vector<DescriptorBlock> read_descriptor_cache(const std::filesystem::path& file, std::string* config_hash) {
  std::ifstream in(file, std::ios::binary);
  const std::string name = file.string();
  if (!in) throw ValidationError("cannot read descriptor cache '" + name + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) {
    throw ValidationError(name + ": not a descriptor cache");
  }
  if (get<std::uint32_t>(in, name) != kCacheVersion) throw ValidationError(name + ": unsupported cache version");
  std::string hash(get<std::uint32_t>(in, name), '\0');
  in.read(hash.data(), static_cast<std::streamsize>(hash.size()));
  if (config_hash) *config_hash = hash;
  const auto count = get<std::uint64_t>(in, name);
  std::vector<DescriptorBlock> blocks;
  blocks.reserve(count);
  for (std::uint64_t b = 0; b < count; ++b) {
    DescriptorBlock block;
    block.doc_id.resize(get<std::uint32_t>(in, name));
    in.read(block.doc_id.data(), static_cast<std::streamsize>(block.doc_id.size()));
    const auto dim = get<std::uint32_t>(in, name);
    if (dim != kDescriptorSize) throw ValidationError(name + ": unexpected descriptor width");
    const auto rows = get<std::uint64_t>(in, name);
    block.descriptors.dim = dim;
    block.descriptors.values.resize(rows * dim);
    if (!in.read(reinterpret_cast<char*>(block.descriptors.values.data()),
                 static_cast<std::streamsize>(block.descriptors.values.size() * sizeof(float)))) {
      throw ValidationError(name + ": truncated descriptor block for '" + block.doc_id + "'");
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace impact
