#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "impact/kmeans.hpp"
#include "impact/learners.hpp"
#include "impact/rng.hpp"
#include "impact/roc.hpp"
#include "impact/sift.hpp"
#include "impact/synthetic.hpp"
#include "impact/text_features.hpp"

namespace {

using namespace impact;

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> level(0, 999);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 2);
    scores[i] = level(rng) / 1000.0 + 0.1 * labels[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(scores, labels).auc);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RocAuc)->Range(256, 1 << 16);

PointMatrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  PointMatrix p{dim, std::vector<float>(n * dim)};
  for (auto& v : p.values) v = u(rng);
  return p;
}

void BM_NearestCentroid(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto points = random_points(4096, kDescriptorSize, 2);
  const auto seeds = random_points(k, kDescriptorSize, 3);
  CentroidMatrix centroids{kDescriptorSize, std::vector<double>(seeds.values.begin(), seeds.values.end())};
  for (auto _ : state) {
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < points.rows(); ++i) sum += nearest_centroid(points.row(i), centroids);
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points.rows()));
}
BENCHMARK(BM_NearestCentroid)->Arg(36)->Arg(100)->Arg(324);

void BM_FitKMeans(benchmark::State& state) {
  const auto points = random_points(static_cast<std::size_t>(state.range(0)), kDescriptorSize, 4);
  KMeansOptions options;
  options.k = 36;
  for (auto _ : state) benchmark::DoNotOptimize(fit_kmeans(points, options).iterations);
}
BENCHMARK(BM_FitKMeans)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Sift(benchmark::State& state) {
  Rng rng(5);
  const auto page = render_page(state.range(0) != 0, 0, rng, 212, 300);
  std::size_t features = 0;
  for (auto _ : state) {
    const auto f = detect_and_describe(page);
    features = f.size();
    benchmark::DoNotOptimize(f.data());
  }
  state.counters["keypoints"] = static_cast<double>(features);
}
BENCHMARK(BM_Sift)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

Dataset sparse_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<std::uint32_t> col(0, static_cast<std::uint32_t>(dim - 1));
  Dataset d;
  d.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 ? 1 : -1;
    std::map<std::uint32_t, double> row;
    for (int j = 0; j < 30; ++j) row[col(rng)] = u(rng);
    row[static_cast<std::uint32_t>(y > 0 ? 0 : 1)] = 0.5;
    SparseVector x{dim, {}};
    for (const auto& [c, v] : row) x.entries.push_back({c, v});
    d.add("d" + std::to_string(i), std::move(x), y);
  }
  return d;
}

void BM_TrainLinearSvm(benchmark::State& state) {
  const auto data = sparse_dataset(static_cast<std::size_t>(state.range(0)), 5000, 6);
  SvmOptions options;
  for (auto _ : state) benchmark::DoNotOptimize(train_linear_svm(data, options).bias);
}
BENCHMARK(BM_TrainLinearSvm)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_TrainRbfSvm(benchmark::State& state) {
  const auto data = sparse_dataset(static_cast<std::size_t>(state.range(0)), 5000, 7);
  SvmOptions options;
  options.sigma = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(train_rbf_svm(data, options).bias);
}
BENCHMARK(BM_TrainRbfSvm)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_TfIdf(benchmark::State& state) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> w(0, 4999);
  std::vector<TokenList> docs(200);
  for (auto& d : docs)
    for (int i = 0; i < 400; ++i) d.push_back("term" + std::to_string(w(rng)));
  const auto vocabulary = build_vocabulary(docs);
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(tfidf_vector(d, vocabulary).vector.nnz());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(docs.size()));
}
BENCHMARK(BM_TfIdf);

}  // namespace

BENCHMARK_MAIN();
