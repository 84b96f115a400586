#pragma once

#include <array>
#include <span>
#include <vector>

#include "impact/image.hpp"

namespace impact {

struct SiftParams {
  int octave_layers = 3;
  double sigma = 1.6;
  double contrast_threshold = 0.03;  // on [0, 1] intensities
  double edge_threshold = 10.0;      // Hessian ratio r
  double assumed_blur = 0.5;         // blur already present in the input
  bool upsample = false;             // double the image before building octaves
  int max_octaves = 0;               // 0 derives the count from the image size
};

struct Keypoint {
  float x = 0;            // image coordinates
  float y = 0;
  float scale = 0;        // sigma in image pixels
  float orientation = 0;  // radians in [0, 2pi), y axis pointing up
  float response = 0;     // interpolated DoG value
  int octave = 0;
  int layer = 0;
};

inline constexpr std::size_t kDescriptorSize = 128;
using Descriptor = std::array<float, kDescriptorSize>;

struct SiftFeature {
  Keypoint keypoint;
  Descriptor descriptor;
};

/// Difference-of-Gaussians detector with 4x4x8 gradient-histogram
/// descriptors. Requires an image of at least 16x16 pixels.
std::vector<SiftFeature> detect_and_describe(const GrayImage& image, const SiftParams& params = {});

/// Normalizes a raw histogram to unit length, clamps components at 0.2 and
/// renormalizes. If `clamped` is given it receives the intermediate vector.
/// Returns false for an all-zero histogram.
bool normalize_descriptor(std::span<const float, kDescriptorSize> raw, Descriptor& out,
                          Descriptor* clamped = nullptr);

/// Separable Gaussian blur, reflect-101 borders, kernel radius ceil(4 sigma).
GrayImage gaussian_blur(const GrayImage& src, double sigma);

}  // namespace impact
