#include <gtest/gtest.h>

#include <cmath>

#include "impact/image.hpp"
#include "impact/kmeans.hpp"
#include "impact/rng.hpp"
#include "impact/sift.hpp"
#include "impact/synthetic.hpp"
#include "impact/visual_features.hpp"
#include "support/checks.hpp"
#include "support/gen.hpp"

namespace impact {
namespace {

using testing::Gen;

PointMatrix random_points(Gen& g, std::size_t n, std::size_t dim, int levels = 0) {
  PointMatrix m{dim, {}};
  for (std::size_t i = 0; i < n * dim; ++i) {
    m.values.push_back(levels ? static_cast<float>(g.integer(0, levels)) : static_cast<float>(g.real(-1, 1)));
  }
  return m;
}

TEST(VisualProperties, LloydObjectiveNeverIncreases) {
  Gen g(1);
  for (int t = 0; t < 200; ++t) {
    const auto dim = g.size(1, 8);
    const auto pts = random_points(g, g.size(10, 300), dim, t % 3 == 0 ? 3 : 0);
    const auto k = std::min<std::size_t>(g.size(1, 12), count_distinct_rows(pts));
    KMeansOptions o;
    o.k = k;
    o.seed = static_cast<std::uint64_t>(t);
    const auto r = fit_kmeans(pts, o);
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      ASSERT_LE(r.objective_history[i], r.objective_history[i - 1] * (1 + 1e-12)) << t << " iter " << i;
    }
    // Centroids are pairwise distinct.
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) {
        double d = 0;
        for (std::size_t j = 0; j < dim; ++j) d += std::abs(r.centroids.row(a)[j] - r.centroids.row(b)[j]);
        ASSERT_GT(d, 0) << t;
      }
  }
}

TEST(VisualProperties, KMeansIsBitDeterministic) {
  Gen g(2);
  for (int t = 0; t < 30; ++t) {
    const auto pts = random_points(g, g.size(20, 400), 16);
    KMeansOptions o;
    o.k = g.size(1, 10);
    o.seed = 77;
    const auto a = fit_kmeans(pts, o);
    o.jobs = 4;
    const auto b = fit_kmeans(pts, o);
    ASSERT_EQ(a.centroids.values, b.centroids.values);
    ASSERT_EQ(a.assignment, b.assignment);
    ASSERT_EQ(a.objective_history, b.objective_history);
  }
}

TEST(VisualProperties, BestOfRestartsMatchesExhaustiveOptimum) {
  const auto r = testing::kmeans_oracle_check(200, 3);
  EXPECT_TRUE(r.ok()) << r.failures << " of " << r.instances << "; " << r.first_failure;
}

TEST(VisualProperties, BovwCountsPartitionDescriptors) {
  Gen g(4);
  for (int t = 0; t < 200; ++t) {
    const auto dim = g.size(1, 6);
    const auto k = g.size(1, 20);
    CentroidMatrix c{dim, {}};
    for (std::size_t i = 0; i < k * dim; ++i) c.values.push_back(static_cast<double>(g.integer(-2, 2)));
    const auto pts = random_points(g, g.size(0, 100), dim, t % 2 ? 2 : 0);
    const auto v = bovw_vector(pts, c);
    v.counts.validate();
    double total = 0;
    for (const auto& e : v.counts.entries) total += e.value;
    ASSERT_EQ(total, static_cast<double>(pts.rows()));
    ASSERT_EQ(v.zero, pts.rows() == 0);
    ASSERT_EQ(bovw_vector(pts, c).counts, v.counts);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
      const auto best = nearest_centroid(pts.row(i), c);
      for (std::uint32_t j = 0; j < k; ++j) {
        const double dj = squared_distance(pts.row(i), c.row(j)), db = squared_distance(pts.row(i), c.row(best));
        ASSERT_TRUE(dj > db || (dj == db && j >= best));
      }
    }
  }
}

TEST(VisualProperties, SelfStandardizedTrainingSet) {
  Gen g(5);
  for (int t = 0; t < 200; ++t) {
    const auto n = g.size(2, 40), dim = g.size(1, 10);
    std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
    for (auto& r : rows)
      for (std::size_t d = 0; d < dim; ++d) r[d] = d == 0 ? 3.0 : static_cast<double>(g.integer(0, 5));
    const auto s = fit_standardizer(rows);
    for (std::size_t d = 0; d < dim; ++d) {
      ASSERT_GE(s.stdev[d], 0);
      double mean = 0, var = 0;
      for (const auto& r : rows) mean += s.apply(r)[d];
      mean /= static_cast<double>(n);
      for (const auto& r : rows) var += std::pow(s.apply(r)[d] - mean, 2);
      var /= static_cast<double>(n);
      ASSERT_NEAR(mean, 0, 1e-9);
      if (s.stdev[d] > 0) ASSERT_NEAR(var, 1, 1e-9);
      else ASSERT_EQ(var, 0.0);
    }
  }
}

TEST(VisualProperties, DescriptorNormalizationBounds) {
  Gen g(6);
  for (int t = 0; t < 2000; ++t) {
    std::array<float, kDescriptorSize> raw{};
    for (auto& v : raw) v = g.coin(0.3) ? static_cast<float>(g.real(0, t % 2 ? 100 : 1)) : 0.0f;
    raw[g.size(0, kDescriptorSize - 1)] = 50.0f;
    Descriptor out, clamped;
    ASSERT_TRUE(normalize_descriptor(raw, out, &clamped));
    double norm = 0;
    for (std::size_t i = 0; i < kDescriptorSize; ++i) {
      ASSERT_LE(clamped[i], 0.2f + 1e-6f);
      ASSERT_GE(out[i], 0.0f);
      norm += double(out[i]) * out[i];
    }
    ASSERT_NEAR(std::sqrt(norm), 1.0, 1e-6);
  }
}

GrayImage rendered_page(std::uint64_t seed, bool dense) {
  Rng rng(seed);
  auto page = render_page(dense, 0, rng, 424, 600);
  return resize_bilinear(page, scaled_width(page.width, page.height, kPageHeight), kPageHeight);
}

TEST(VisualProperties, KeypointsLieInsideTheImage) {
  const SiftParams p;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const auto img = rendered_page(s, s % 2 == 0);
    for (const auto& f : detect_and_describe(img, p)) {
      ASSERT_GE(f.keypoint.x, 0);
      ASSERT_LT(f.keypoint.x, img.width);
      ASSERT_GE(f.keypoint.y, 0);
      ASSERT_LT(f.keypoint.y, img.height);
      ASSERT_GE(std::abs(f.keypoint.response), p.contrast_threshold);
      ASSERT_GE(f.keypoint.orientation, 0);
      ASSERT_LT(f.keypoint.orientation, 2 * M_PI);
    }
  }
}

double cosine(const Descriptor& a, const Descriptor& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < kDescriptorSize; ++i) ab += double(a[i]) * b[i], aa += double(a[i]) * a[i], bb += double(b[i]) * b[i];
  return ab / std::sqrt(aa * bb);
}

TEST(VisualProperties, DescriptorsSurviveQuarterTurns) {
  for (std::uint64_t s : {11u, 12u, 13u}) {
    const auto img = rendered_page(s, true);
    const auto rot = rotate90_clockwise(img);
    const auto a = detect_and_describe(img);
    const auto b = detect_and_describe(rot);
    ASSERT_GT(a.size(), 20u);
    EXPECT_NEAR(static_cast<double>(b.size()), static_cast<double>(a.size()), 0.1 * a.size()) << "seed " << s;

    // (x, y) maps to (h - 1 - y, x) under a clockwise quarter turn.
    std::size_t matched = 0;
    for (const auto& fa : a) {
      const double ex = img.height - 1 - fa.keypoint.y, ey = fa.keypoint.x;
      double best = 0;
      for (const auto& fb : b) {
        if (std::hypot(fb.keypoint.x - ex, fb.keypoint.y - ey) > 1.5) continue;
        if (std::abs(std::log(fb.keypoint.scale / fa.keypoint.scale)) > 0.2) continue;
        best = std::max(best, cosine(fa.descriptor, fb.descriptor));
      }
      matched += best >= 0.9;
    }
    EXPECT_GE(static_cast<double>(matched), 0.5 * a.size()) << "seed " << s << ": " << matched << " of " << a.size();
  }
}

}  // namespace
}  // namespace impact
