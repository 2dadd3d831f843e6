#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eyectl/core.hpp"

namespace eyectl {

/// Row-major single-channel image. `Pixel` is uint8_t for intensity, uint16_t for depth.
template <typename Pixel>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Pixel> data;

  Image() = default;
  Image(int w, int h, Pixel fill = Pixel{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  bool empty() const { return width <= 0 || height <= 0; }
  Pixel& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  Pixel at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::span<const Pixel> row(int y) const { return {data.data() + static_cast<std::size_t>(y) * width, static_cast<std::size_t>(width)}; }

  friend bool operator==(const Image&, const Image&) = default;
};

using GrayImage = Image<std::uint8_t>;
using Gray16Image = Image<std::uint16_t>;

/// Interleaved 8-bit RGB.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ColorImage() = default;
  ColorImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t* px(int x, int y) { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* px(int x, int y) const { return data.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
};

/// ITU-R BT.601 luma.
GrayImage to_gray(const ColorImage& color);
ColorImage to_color(const GrayImage& gray);

/// Reads PNG (8/16-bit, gray/RGB/RGBA) or binary PNM (P5/P6). Color input is converted to luma.
GrayImage load_gray(const std::filesystem::path& path);
ColorImage load_color(const std::filesystem::path& path);
/// 16-bit single-channel PNG or P5 PGM with maxval > 255.
Gray16Image load_gray16(const std::filesystem::path& path);

/// Format picked from the extension: .png, .pgm, .ppm.
void save_image(const std::filesystem::path& path, const GrayImage& img);
void save_image(const std::filesystem::path& path, const ColorImage& img);
void save_image(const std::filesystem::path& path, const Gray16Image& img);

/// Integer crop of the pixels covered by `box` (floor of the origin, ceil of the far edge),
/// clamped to the image.
GrayImage crop(const GrayImage& img, const BoundingBox& box);
/// Bilinear resampling to the given size.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);
/// Clockwise rotation by 90 degrees: (x, y) -> (H - 1 - y, x).
GrayImage rotate90_cw(const GrayImage& img);

}  // namespace eyectl
