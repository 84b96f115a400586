#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace impact {

/// Row-major grayscale image with intensities in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, float fill = 0.0f)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const noexcept { return pixels.empty(); }
};

inline constexpr int kPageHeight = 300;

/// Decodes a PNG or JPEG into Rec. 601 luma. Throws ValidationError naming the
/// path if the file cannot be decoded or has zero area.
GrayImage load_gray_image(const std::filesystem::path& path);
bool is_decodable_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG.
void save_gray_png(const std::filesystem::path& path, const GrayImage& image);

/// Bilinear resampling with pixel-center alignment.
GrayImage resize_bilinear(const GrayImage& src, int width, int height);

/// Width after scaling to target_height with the aspect ratio preserved.
int scaled_width(int width, int height, int target_height);

/// Scales every page to target_height and concatenates them left to right.
GrayImage concatenate_pages(std::span<const GrayImage> pages, int target_height = kPageHeight);

/// Loads, converts and concatenates a document's pages into one strip.
GrayImage prepare_document_image(std::span<const std::filesystem::path> page_paths,
                                 int target_height = kPageHeight);

GrayImage rotate90_clockwise(const GrayImage& src);

}  // namespace impact
