#include "impact/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "impact/error.hpp"

namespace impact {

GrayImage load_gray_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception&) {
    bgr.release();
  }
  if (bgr.empty()) throw ValidationError("cannot decode image '" + path.string() + "'");
  if (bgr.cols == 0 || bgr.rows == 0) throw ValidationError("zero-area image '" + path.string() + "'");
  GrayImage out(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      const double luma = 0.299 * row[x][2] + 0.587 * row[x][1] + 0.114 * row[x][0];
      out.at(x, y) = static_cast<float>(std::clamp(luma / 255.0, 0.0, 1.0));
    }
  }
  return out;
}

bool is_decodable_image(const std::filesystem::path& path) {
  try {
    return !cv::imread(path.string(), cv::IMREAD_REDUCED_GRAYSCALE_8).empty();
  } catch (const cv::Exception&) {
    return false;
  }
}

void save_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  cv::Mat m(image.height, image.width, CV_8UC1);
  for (int y = 0; y < image.height; ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width; ++x) {
      row[x] = static_cast<std::uint8_t>(std::lround(std::clamp(image.at(x, y), 0.0f, 1.0f) * 255.0f));
    }
  }
  if (!cv::imwrite(path.string(), m)) throw RuntimeFailure("cannot write image '" + path.string() + "'");
}

GrayImage resize_bilinear(const GrayImage& src, int width, int height) {
  if (width == src.width && height == src.height) return src;
  GrayImage dst(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      const double top = (1 - wx) * src.at(x0, y0) + wx * src.at(x1, y0);
      const double bottom = (1 - wx) * src.at(x0, y1) + wx * src.at(x1, y1);
      dst.at(x, y) = static_cast<float>((1 - wy) * top + wy * bottom);
    }
  }
  return dst;
}

int scaled_width(int width, int height, int target_height) {
  const long w = std::lround(static_cast<double>(width) * target_height / height);
  return static_cast<int>(std::max(1L, w));
}

GrayImage concatenate_pages(std::span<const GrayImage> pages, int target_height) {
  if (pages.empty()) throw ValidationError("document has no pages");
  std::vector<GrayImage> scaled;
  scaled.reserve(pages.size());
  int total = 0;
  for (const auto& p : pages) {
    if (p.width <= 0 || p.height <= 0) throw ValidationError("zero-area page");
    scaled.push_back(resize_bilinear(p, scaled_width(p.width, p.height, target_height), target_height));
    total += scaled.back().width;
  }
  GrayImage strip(total, target_height);
  int offset = 0;
  for (const auto& s : scaled) {
    for (int y = 0; y < target_height; ++y) {
      std::copy_n(&s.pixels[static_cast<std::size_t>(y) * s.width], s.width,
                  &strip.pixels[static_cast<std::size_t>(y) * total + offset]);
    }
    offset += s.width;
  }
  return strip;
}

GrayImage prepare_document_image(std::span<const std::filesystem::path> page_paths, int target_height) {
  std::vector<GrayImage> pages;
  pages.reserve(page_paths.size());
  for (const auto& p : page_paths) pages.push_back(load_gray_image(p));
  return concatenate_pages(pages, target_height);
}

GrayImage rotate90_clockwise(const GrayImage& src) {
  GrayImage dst(src.height, src.width);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) dst.at(src.height - 1 - y, x) = src.at(x, y);
  }
  return dst;
}

}  // namespace impact
