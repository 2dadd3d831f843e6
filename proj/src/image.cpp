#include "eyectl/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "eyectl/error.hpp"

namespace eyectl {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string ext_of(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

/// Decoded raster before conversion: channels in {1,3}, depth in {8,16}. 16-bit samples
/// are stored native-endian in `samples16`.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  int depth = 8;
  std::vector<std::uint8_t> samples8;
  std::vector<std::uint16_t> samples16;
};

bool is_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Raster read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  Raster r;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian host
  png_read_update_info(png, info);

  r.width = static_cast<int>(png_get_image_width(png, info));
  r.height = static_cast<int>(png_get_image_height(png, info));
  r.channels = png_get_channels(png, info);
  r.depth = png_get_bit_depth(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * r.height);
  rows.resize(r.height);
  for (int y = 0; y < r.height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (r.channels != 1 && r.channels != 3) throw IoError("unsupported PNG channel count in " + path.string());
  if (r.depth == 16) {
    r.samples16.resize(buffer.size() / 2);
    std::memcpy(r.samples16.data(), buffer.data(), buffer.size());
  } else {
    r.samples8 = std::move(buffer);
  }
  return r;
}

void write_png(const std::filesystem::path& path, int width, int height, int channels, int depth,
               const std::uint8_t* bytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (depth == 16) png_set_swap(png);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (depth / 8);
  for (int y = 0; y < height; ++y) png_write_row(png, const_cast<png_bytep>(bytes + rowbytes * y));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (std::isspace(c) || c == '#') {
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int v = -1;
  in >> v;
  return v;
}

Raster read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (magic != "P5" && magic != "P6") throw IoError("unsupported image format: " + path.string());
  Raster r;
  r.channels = magic == "P5" ? 1 : 3;
  r.width = read_pnm_int(in);
  r.height = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (r.width <= 0 || r.height <= 0 || maxval <= 0 || maxval > 65535) throw IoError("bad PNM header in " + path.string());
  in.get();
  r.depth = maxval > 255 ? 16 : 8;
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height * r.channels;
  if (r.depth == 8) {
    r.samples8.resize(n);
    in.read(reinterpret_cast<char*>(r.samples8.data()), static_cast<std::streamsize>(n));
  } else {
    std::vector<std::uint8_t> raw(n * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    r.samples16.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.samples16[i] = static_cast<std::uint16_t>(raw[2 * i] << 8 | raw[2 * i + 1]);
  }
  if (!in) throw IoError("truncated PNM " + path.string());
  return r;
}

Raster read_any(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file " + path.string());
  return is_png(path) ? read_png(path) : read_pnm(path);
}

void write_pnm(const std::filesystem::path& path, int width, int height, int channels, int depth,
               const std::uint8_t* bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (channels == 1 ? "P5" : "P6") << '\n' << width << ' ' << height << '\n' << (depth == 16 ? 65535 : 255) << '\n';
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (depth == 8) {
    out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(n));
  } else {
    const auto* words = reinterpret_cast<const std::uint16_t*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      const char be[2] = {static_cast<char>(words[i] >> 8), static_cast<char>(words[i] & 0xff)};
      out.write(be, 2);
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_any(const std::filesystem::path& path, int width, int height, int channels, int depth,
               const std::uint8_t* bytes) {
  const auto ext = ext_of(path);
  if (ext == ".png") {
    write_png(path, width, height, channels, depth, bytes);
  } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    write_pnm(path, width, height, channels, depth, bytes);
  } else {
    throw IoError("unsupported output extension: " + path.string());
  }
}

std::uint8_t luma(int r, int g, int b) {
  return static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

}  // namespace

GrayImage to_gray(const ColorImage& color) {
  GrayImage out(color.width, color.height);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = luma(color.data[3 * i], color.data[3 * i + 1], color.data[3 * i + 2]);
  }
  return out;
}

ColorImage to_color(const GrayImage& gray) {
  ColorImage out(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = gray.data[i];
  }
  return out;
}

GrayImage load_gray(const std::filesystem::path& path) {
  Raster r = read_any(path);
  GrayImage out(r.width, r.height);
  const std::size_t n = out.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (r.depth == 8) {
      out.data[i] = r.channels == 1 ? r.samples8[i] : luma(r.samples8[3 * i], r.samples8[3 * i + 1], r.samples8[3 * i + 2]);
    } else {
      auto s = [&](std::size_t k) { return static_cast<int>(r.samples16[k] >> 8); };
      out.data[i] = r.channels == 1 ? static_cast<std::uint8_t>(s(i)) : luma(s(3 * i), s(3 * i + 1), s(3 * i + 2));
    }
  }
  return out;
}

ColorImage load_color(const std::filesystem::path& path) {
  Raster r = read_any(path);
  ColorImage out(r.width, r.height);
  const std::size_t n = static_cast<std::size_t>(r.width) * r.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t k = r.channels == 1 ? i : 3 * i + c;
      out.data[3 * i + c] = r.depth == 8 ? r.samples8[k] : static_cast<std::uint8_t>(r.samples16[k] >> 8);
    }
  }
  return out;
}

Gray16Image load_gray16(const std::filesystem::path& path) {
  Raster r = read_any(path);
  if (r.channels != 1) throw IoError("depth image must be single-channel: " + path.string());
  Gray16Image out(r.width, r.height);
  if (r.depth == 16) {
    out.data = std::move(r.samples16);
  } else {
    std::copy(r.samples8.begin(), r.samples8.end(), out.data.begin());
  }
  return out;
}

void save_image(const std::filesystem::path& path, const GrayImage& img) {
  write_any(path, img.width, img.height, 1, 8, img.data.data());
}

void save_image(const std::filesystem::path& path, const ColorImage& img) {
  write_any(path, img.width, img.height, 3, 8, img.data.data());
}

void save_image(const std::filesystem::path& path, const Gray16Image& img) {
  write_any(path, img.width, img.height, 1, 16, reinterpret_cast<const std::uint8_t*>(img.data.data()));
}

GrayImage crop(const GrayImage& img, const BoundingBox& box) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x)), 0, img.width);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y)), 0, img.height);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.x + box.w)), 0, img.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.y + box.h)), 0, img.height);
  GrayImage out(std::max(0, x1 - x0), std::max(0, y1 - y0));
  for (int y = 0; y < out.height; ++y) {
    std::copy_n(img.data.begin() + static_cast<std::ptrdiff_t>(y0 + y) * img.width + x0, out.width,
                out.data.begin() + static_cast<std::ptrdiff_t>(y) * out.width);
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  GrayImage out(width, height);
  if (img.empty() || width <= 0 || height <= 0) return out;
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = img.at(x0, y0) * (1 - wx) + img.at(x1, y0) * wx;
      const double bot = img.at(x0, y1) * (1 - wx) + img.at(x1, y1) * wx;
      out.at(x, y) = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bot * wy));
    }
  }
  return out;
}

GrayImage rotate90_cw(const GrayImage& img) {
  GrayImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) out.at(img.height - 1 - y, x) = img.at(x, y);
  }
  return out;
}

}  // namespace eyectl
