#include "impact/sift.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "impact/error.hpp"

namespace impact {

namespace {

constexpr int kBorder = 5;
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriRadiusFactor = 3.0 * kOriSigmaFactor;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescScaleFactor = 3.0;
constexpr double kDescMagThreshold = 0.2;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  std::vector<float> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = static_cast<float>(k[i] / sum);
  return out;
}

GrayImage downsample_half(const GrayImage& src) {
  GrayImage dst((src.width + 1) / 2, (src.height + 1) / 2);
  for (int y = 0; y < dst.height; ++y) {
    for (int x = 0; x < dst.width; ++x) dst.at(x, y) = src.at(2 * x, 2 * y);
  }
  return dst;
}

GrayImage subtract(const GrayImage& a, const GrayImage& b) {
  GrayImage out(a.width, a.height);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) out.pixels[i] = a.pixels[i] - b.pixels[i];
  return out;
}

struct Pyramid {
  std::vector<std::vector<GrayImage>> gauss;  // [octave][layers + 3]
  std::vector<std::vector<GrayImage>> dog;    // [octave][layers + 2]
};

Pyramid build_pyramid(const GrayImage& base, int octaves, const SiftParams& p) {
  const int s = p.octave_layers;
  std::vector<double> sig(s + 3);
  sig[0] = p.sigma;
  const double k = std::pow(2.0, 1.0 / s);
  for (int i = 1; i < s + 3; ++i) {
    const double prev = std::pow(k, i - 1) * p.sigma;
    const double total = prev * k;
    sig[i] = std::sqrt(total * total - prev * prev);
  }
  Pyramid pyr;
  pyr.gauss.resize(octaves);
  pyr.dog.resize(octaves);
  for (int o = 0; o < octaves; ++o) {
    auto& g = pyr.gauss[o];
    g.reserve(s + 3);
    g.push_back(o == 0 ? base : downsample_half(pyr.gauss[o - 1][s]));
    for (int i = 1; i < s + 3; ++i) g.push_back(gaussian_blur(g[i - 1], sig[i]));
    for (int i = 0; i < s + 2; ++i) pyr.dog[o].push_back(subtract(g[i + 1], g[i]));
  }
  return pyr;
}

bool is_extremum(const std::vector<GrayImage>& dog, int layer, int x, int y, float threshold) {
  const float v = dog[layer].at(x, y);
  if (std::abs(v) <= threshold) return false;
  for (int l = layer - 1; l <= layer + 1; ++l) {
    const auto& img = dog[l];
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (l == layer && dx == 0 && dy == 0) continue;
        const float n = img.at(x + dx, y + dy);
        if (v > 0 ? n > v : n < v) return false;
      }
    }
  }
  return true;
}

// Solves H x = b for a symmetric 3x3 system; returns false if singular.
bool solve3(const double h[3][3], const double b[3], double x[3]) {
  const double det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                     h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                     h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
  if (std::abs(det) < 1e-12) return false;
  double m[3][3];
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      for (int cc = 0; cc < 3; ++cc) m[r][cc] = cc == c ? b[r] : h[r][cc];
    }
    x[c] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
           det;
  }
  return true;
}

struct Refined {
  int x, y, layer;
  double offset[3];
  double contrast;
};

bool refine_extremum(const std::vector<GrayImage>& dog, int s, int& x, int& y, int& layer, const SiftParams& p,
                     Refined& out) {
  const int w = dog[0].width;
  const int h = dog[0].height;
  double off[3] = {0, 0, 0};
  double grad[3] = {0, 0, 0};
  int step = 0;
  for (; step < kMaxInterpSteps; ++step) {
    const auto& prev = dog[layer - 1];
    const auto& cur = dog[layer];
    const auto& next = dog[layer + 1];
    const double v2 = 2.0 * cur.at(x, y);
    grad[0] = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
    grad[1] = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
    grad[2] = 0.5 * (next.at(x, y) - prev.at(x, y));
    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
    const double dss = next.at(x, y) + prev.at(x, y) - v2;
    const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
    const double dxs = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y));
    const double dys = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1));
    const double hess[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
    double sol[3];
    if (!solve3(hess, grad, sol)) return false;
    for (int i = 0; i < 3; ++i) off[i] = -sol[i];
    if (std::abs(off[0]) < 0.5 && std::abs(off[1]) < 0.5 && std::abs(off[2]) < 0.5) break;
    if (std::abs(off[0]) > w || std::abs(off[1]) > h || std::abs(off[2]) > s) return false;
    x += static_cast<int>(std::lround(off[0]));
    y += static_cast<int>(std::lround(off[1]));
    layer += static_cast<int>(std::lround(off[2]));
    if (layer < 1 || layer > s || x < kBorder || x >= w - kBorder || y < kBorder || y >= h - kBorder) return false;
  }
  if (step >= kMaxInterpSteps) return false;

  const auto& cur = dog[layer];
  const double contrast = cur.at(x, y) + 0.5 * (grad[0] * off[0] + grad[1] * off[1] + grad[2] * off[2]);
  if (std::abs(contrast) < p.contrast_threshold) return false;

  const double v2 = 2.0 * cur.at(x, y);
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
  const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double r = p.edge_threshold;
  if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;

  out = {x, y, layer, {off[0], off[1], off[2]}, contrast};
  return true;
}

// Gradient in a y-up frame: positive dy points toward smaller row index.
inline bool gradient(const GrayImage& img, int x, int y, double& dx, double& dy) {
  if (x <= 0 || x >= img.width - 1 || y <= 0 || y >= img.height - 1) return false;
  dx = static_cast<double>(img.at(x + 1, y)) - img.at(x - 1, y);
  dy = static_cast<double>(img.at(x, y - 1)) - img.at(x, y + 1);
  return true;
}

// Per-pixel gradient magnitude and angle of one Gaussian layer, computed once
// per layer that has keypoints. Border pixels have no gradient (mag < 0).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> mag;
  std::vector<double> angle;

  explicit GradientField(const GrayImage& img)
      : width(img.width), height(img.height), mag(img.pixels.size(), -1.0), angle(img.pixels.size(), 0.0) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double dx, dy;
        if (!gradient(img, x, y, dx, dy)) continue;
        const std::size_t i = static_cast<std::size_t>(y) * width + x;
        mag[i] = std::hypot(dx, dy);
        angle[i] = std::atan2(dy, dx);
      }
    }
  }
  bool at(int x, int y, double& m, double& a) const {
    if (x < 0 || y < 0 || x >= width || y >= height) return false;
    const std::size_t i = static_cast<std::size_t>(y) * width + x;
    if (mag[i] < 0) return false;
    m = mag[i];
    a = angle[i];
    return true;
  }
};

std::vector<double> orientation_peaks(const GradientField& img, int x, int y, double scale_oct) {
  const int radius = static_cast<int>(std::lround(kOriRadiusFactor * scale_oct));
  const double weight_scale = -1.0 / (2.0 * std::pow(kOriSigmaFactor * scale_oct, 2));
  std::array<double, kOriBins> raw{};
  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      double mag, angle;
      if (!img.at(x + j, y + i, mag, angle)) continue;
      if (angle < 0) angle += kTwoPi;
      const double weight = std::exp((i * i + j * j) * weight_scale);
      int bin = static_cast<int>(std::lround(kOriBins * angle / kTwoPi));
      if (bin >= kOriBins) bin -= kOriBins;
      raw[bin] += weight * mag;
    }
  }
  std::array<double, kOriBins> hist{};
  for (int b = 0; b < kOriBins; ++b) {
    const auto at = [&](int k) { return raw[(b + k + kOriBins) % kOriBins]; };
    hist[b] = (at(-2) + at(2)) * (1.0 / 16) + (at(-1) + at(1)) * (4.0 / 16) + at(0) * (6.0 / 16);
  }
  const double max = *std::max_element(hist.begin(), hist.end());
  std::vector<double> peaks;
  if (max <= 0) return peaks;
  for (int b = 0; b < kOriBins; ++b) {
    const double left = hist[(b + kOriBins - 1) % kOriBins];
    const double right = hist[(b + 1) % kOriBins];
    const double c = hist[b];
    if (c > left && c > right && c >= kOriPeakRatio * max) {
      double bin = b + 0.5 * (left - right) / (left - 2 * c + right);
      if (bin < 0) bin += kOriBins;
      if (bin >= kOriBins) bin -= kOriBins;
      peaks.push_back(bin * kTwoPi / kOriBins);
    }
  }
  return peaks;
}

bool describe(const GradientField& img, double px, double py, double orientation, double scale_oct, Descriptor& out) {
  constexpr int d = kDescWidth;
  constexpr int n = kDescBins;
  const int x = static_cast<int>(std::lround(px));
  const int y = static_cast<int>(std::lround(py));
  const double hist_width = kDescScaleFactor * scale_oct;
  int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::hypot(img.width, img.height)));
  const double cos_t = std::cos(orientation) / hist_width;
  const double sin_t = std::sin(orientation) / hist_width;
  const double bins_per_rad = n / kTwoPi;
  const double exp_scale = -1.0 / (d * d * 0.5);

  // (d + 2) x (d + 2) x (n + 2) accumulator so trilinear spill needs no bounds checks.
  std::vector<double> hist((d + 2) * (d + 2) * (n + 2), 0.0);
  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      const double c_rot = j * cos_t - i * sin_t;
      const double r_rot = j * sin_t + i * cos_t;
      const double rbin = r_rot + d / 2.0 - 0.5;
      const double cbin = c_rot + d / 2.0 - 0.5;
      if (!(rbin > -1 && rbin < d && cbin > -1 && cbin < d)) continue;
      double grad_mag, grad_angle;
      if (!img.at(x + j, y + i, grad_mag, grad_angle)) continue;
      double ori = grad_angle - orientation;
      ori = std::fmod(ori, kTwoPi);
      if (ori < 0) ori += kTwoPi;
      const double obin = ori * bins_per_rad;
      const double mag = grad_mag * std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0;
      const double fc = cbin - c0;
      const double fo = obin - o0;
      if (o0 < 0) o0 += n;
      if (o0 >= n) o0 -= n;
      for (int dr = 0; dr <= 1; ++dr) {
        const double wr = dr ? fr : 1 - fr;
        for (int dc = 0; dc <= 1; ++dc) {
          const double wc = dc ? fc : 1 - fc;
          for (int dob = 0; dob <= 1; ++dob) {
            const double wo = dob ? fo : 1 - fo;
            const int idx = ((r0 + 1 + dr) * (d + 2) + (c0 + 1 + dc)) * (n + 2) + o0 + dob;
            hist[idx] += mag * wr * wc * wo;
          }
        }
      }
    }
  }

  std::array<float, kDescriptorSize> raw{};
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const int base = ((r + 1) * (d + 2) + (c + 1)) * (n + 2);
      hist[base] += hist[base + n];  // wrap orientation n back to 0
      for (int o = 0; o < n; ++o) raw[(r * d + c) * n + o] = static_cast<float>(hist[base + o]);
    }
  }
  return normalize_descriptor(raw, out);
}

}  // namespace

GrayImage gaussian_blur(const GrayImage& src, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = src.width, h = src.height;
  // Rows are padded with reflect-101 borders so the inner loop has no branches.
  std::vector<float> line(static_cast<std::size_t>(std::max(w, h) + 2 * radius));
  std::vector<float> acc(static_cast<std::size_t>(std::max(w, h)));
  auto convolve = [&](int n, auto&& load, auto&& store) {
    for (int i = -radius; i < n + radius; ++i) line[i + radius] = load(reflect101(i, n));
    // Tap-outer order keeps each output's summation order fixed while letting
    // the inner loop vectorize across outputs.
    std::fill(acc.begin(), acc.begin() + n, 0.0f);
    for (std::size_t k = 0; k < kernel.size(); ++k) {
      const float kv = kernel[k];
      const float* p = line.data() + k;
      for (int i = 0; i < n; ++i) acc[i] += kv * p[i];
    }
    for (int i = 0; i < n; ++i) store(i, acc[i]);
  };
  GrayImage tmp(w, h);
  for (int y = 0; y < h; ++y) {
    convolve(w, [&](int x) { return src.at(x, y); }, [&](int x, float v) { tmp.at(x, y) = v; });
  }
  GrayImage dst(w, h);
  for (int x = 0; x < w; ++x) {
    convolve(h, [&](int y) { return tmp.at(x, y); }, [&](int y, float v) { dst.at(x, y) = v; });
  }
  return dst;
}

bool normalize_descriptor(std::span<const float, kDescriptorSize> raw, Descriptor& out, Descriptor* clamped) {
  double norm2 = 0;
  for (float v : raw) norm2 += static_cast<double>(v) * v;
  if (norm2 <= 0) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  Descriptor tmp;
  double clamped2 = 0;
  for (std::size_t i = 0; i < kDescriptorSize; ++i) {
    const double v = std::min(raw[i] * inv, kDescMagThreshold);
    tmp[i] = static_cast<float>(v);
    clamped2 += v * v;
  }
  if (clamped) *clamped = tmp;
  const double inv2 = 1.0 / std::sqrt(clamped2);
  for (std::size_t i = 0; i < kDescriptorSize; ++i) out[i] = static_cast<float>(tmp[i] * inv2);
  return true;
}

std::vector<SiftFeature> detect_and_describe(const GrayImage& image, const SiftParams& p) {
  if (image.width < 16 || image.height < 16) {
    throw ValidationError("sift: image must be at least 16x16, got " + std::to_string(image.width) + "x" +
                          std::to_string(image.height));
  }
  if (p.octave_layers < 1 || p.sigma <= 0) throw ValidationError("sift: invalid parameters");

  GrayImage base;
  double present_blur = p.assumed_blur;
  if (p.upsample) {
    base = resize_bilinear(image, image.width * 2, image.height * 2);
    present_blur *= 2;
  } else {
    base = image;
  }
  base = gaussian_blur(base, std::sqrt(std::max(p.sigma * p.sigma - present_blur * present_blur, 0.01)));

  const int min_dim = std::min(base.width, base.height);
  int octaves = std::max(1, static_cast<int>(std::floor(std::log2(static_cast<double>(min_dim)))) - 3);
  if (p.max_octaves > 0) octaves = std::min(octaves, p.max_octaves);
  const auto pyr = build_pyramid(base, octaves, p);

  const int s = p.octave_layers;
  const float prelim = static_cast<float>(0.5 * p.contrast_threshold);
  const double coord_scale = p.upsample ? 0.5 : 1.0;
  std::vector<SiftFeature> features;
  std::vector<std::unique_ptr<GradientField>> fields(static_cast<std::size_t>(octaves * (s + 3)));

  for (int o = 0; o < octaves; ++o) {
    const auto& dog = pyr.dog[o];
    const int w = dog[0].width;
    const int h = dog[0].height;
    const double octave_scale = std::ldexp(1.0, o);
    for (int layer = 1; layer <= s; ++layer) {
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          if (!is_extremum(dog, layer, x, y, prelim)) continue;
          int rx = x, ry = y, rl = layer;
          Refined ref;
          if (!refine_extremum(dog, s, rx, ry, rl, p, ref)) continue;

          const auto kx = static_cast<float>((ref.x + ref.offset[0]) * octave_scale * coord_scale);
          const auto ky = static_cast<float>((ref.y + ref.offset[1]) * octave_scale * coord_scale);
          if (kx < 0 || ky < 0 || kx >= image.width || ky >= image.height) continue;
          const double scale_oct = p.sigma * std::pow(2.0, (ref.layer + ref.offset[2]) / s);
          auto& field = fields[static_cast<std::size_t>(o * (s + 3) + ref.layer)];
          if (!field) field = std::make_unique<GradientField>(pyr.gauss[o][ref.layer]);
          const auto& gimg = *field;

          for (double angle : orientation_peaks(gimg, ref.x, ref.y, scale_oct)) {
            SiftFeature f;
            if (!describe(gimg, ref.x + ref.offset[0], ref.y + ref.offset[1], angle, scale_oct, f.descriptor)) continue;
            f.keypoint = {kx,
                          ky,
                          static_cast<float>(scale_oct * octave_scale * coord_scale),
                          static_cast<float>(angle),
                          static_cast<float>(ref.contrast),
                          o,
                          ref.layer};
            features.push_back(f);
          }
        }
      }
    }
  }
  return features;
}

}  // namespace impact
