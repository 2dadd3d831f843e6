#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "eyectl/features.hpp"

namespace eyectl {

namespace {

// Learned rotated-BRIEF sampling pairs (x0, y0, x1, y1), 31x31 patch.
constexpr std::array<int, 256 * 4> kBriefPattern = {
    8, -3, 9, 5, 4, 2, 7, -12, -11, 9, -8, 2, 7, -12, 12, -13,
    2, -13, 2, 12, 1, -7, 1, 6, -2, -10, -2, -4, -13, -13, -11, -8,
    -13, -3, -12, -9, 10, 4, 11, 9, -13, -8, -8, -9, -11, 7, -9, 12,
    7, 7, 12, 6, -4, -5, -3, 0, -13, 2, -12, -3, -9, 0, -7, 5,
    12, -6, 12, -1, -3, 6, -2, 12, -6, -13, -4, -8, 11, -13, 12, -8,
    4, 7, 5, 1, 5, -3, 10, -3, 3, -7, 6, 12, -8, -7, -6, -2,
    -2, 11, -1, -10, -13, 12, -8, 10, -7, 3, -5, -3, -4, 2, -3, 7,
    -10, -12, -6, 11, 5, -12, 6, -7, 5, -6, 7, -1, 1, 0, 4, -5,
    9, 11, 11, -13, 4, 7, 4, 12, 2, -1, 4, 4, -4, -12, -2, 7,
    -8, -5, -7, -10, 4, 11, 9, 12, 0, -8, 1, -13, -13, -2, -8, 2,
    -3, -2, -2, 3, -6, 9, -4, -9, 8, 12, 10, 7, 0, 9, 1, 3,
    7, -5, 11, -10, -13, -6, -11, 0, 10, 7, 12, 1, -6, -3, -6, 12,
    10, -9, 12, -4, -13, 8, -8, -12, -13, 0, -8, -4, 3, 3, 7, 8,
    5, 7, 10, -7, -1, 7, 1, -12, 3, -10, 5, 6, 2, -4, 3, -10,
    -13, 0, -13, 5, -13, -7, -12, 12, -13, 3, -11, 8, -7, 12, -4, 7,
    6, -10, 12, 8, -9, -1, -7, -6, -2, -5, 0, 12, -12, 5, -7, 5,
    3, -10, 8, -13, -7, -7, -4, 5, -3, -2, -1, -7, 2, 9, 5, -11,
    -11, -13, -5, -13, -1, 6, 0, -1, 5, -3, 5, 2, -4, -13, -4, 12,
    -9, -6, -9, 6, -12, -10, -8, -4, 10, 2, 12, -3, 7, 12, 12, 12,
    -7, -13, -6, 5, -4, 9, -3, 4, 7, -1, 12, 2, -7, 6, -5, 1,
    -13, 11, -12, 5, -3, 7, -2, -6, 7, -8, 12, -7, -13, -7, -11, -12,
    1, -3, 12, 12, 2, -6, 3, 0, -4, 3, -2, -13, -1, -13, 1, 9,
    7, 1, 8, -6, 1, -1, 3, 12, 9, 1, 12, 6, -1, -9, -1, 3,
    -13, -13, -10, 5, 7, 7, 10, 12, 12, -5, 12, 9, 6, 3, 7, 11,
    5, -13, 6, 10, 2, -12, 2, 3, 3, 8, 4, -6, 2, 6, 12, -13,
    9, -12, 10, 3, -8, 4, -7, 9, -11, 12, -4, -6, 1, 12, 2, -8,
    6, -9, 7, -4, 2, 3, 3, -2, 6, 3, 11, 0, 3, -3, 8, -8,
    7, 8, 9, 3, -11, -5, -6, -4, -10, 11, -5, 10, -5, -8, -3, 12,
    -10, 5, -9, 0, 8, -1, 12, -6, 4, -6, 6, -11, -10, 12, -8, 7,
    4, -2, 6, 7, -2, 0, -2, 12, -5, -8, -5, 2, 7, -6, 10, 12,
    -9, -13, -8, -8, -5, -13, -5, -2, 8, -8, 9, -13, -9, -11, -9, 0,
    1, -8, 1, -2, 7, -4, 9, 1, -2, 1, -1, -4, 11, -6, 12, -11,
    -12, -9, -6, 4, 3, 7, 7, 12, 5, 5, 10, 8, 0, -4, 2, 8,
    -9, 12, -5, -13, 0, 7, 2, 12, -1, 2, 1, 7, 5, 11, 7, -9,
    3, 5, 6, -8, -13, -4, -8, 9, -5, 9, -3, -3, -4, -7, -3, -12,
    6, 5, 8, 0, -7, 6, -6, 12, -13, 6, -5, -2, 1, -10, 3, 10,
    4, 1, 8, -4, -2, -2, 2, -13, 2, -12, 12, 12, -2, -13, 0, -6,
    4, 1, 9, 3, -6, -10, -3, -5, -3, -13, -1, 1, 7, 5, 12, -11,
    4, -2, 5, -7, -13, 9, -9, -5, 7, 1, 8, 6, 7, -8, 7, 6,
    -7, -4, -7, 1, -8, 11, -7, -8, -13, 6, -12, -8, 2, 4, 3, 9,
    10, -5, 12, 3, -6, -5, -6, 7, 8, -3, 9, -8, 2, -12, 2, 8,
    -11, -2, -10, 3, -12, -13, -7, -9, -11, 0, -10, -5, 5, -3, 11, 8,
    -2, -13, -1, 12, -1, -8, 0, 9, -13, -11, -12, -5, -10, -2, -10, 11,
    -3, 9, -2, -13, 2, -3, 3, 2, -9, -13, -4, 0, -4, 6, -3, -10,
    -4, 12, -2, -7, -6, -11, -4, 9, 6, -3, 6, 11, -13, 11, -5, 5,
    11, 11, 12, 6, 7, -5, 12, -2, -1, 12, 0, 7, -4, -8, -3, -2,
    -7, 1, -6, 7, -13, -12, -8, -13, -7, -2, -6, -8, -8, 5, -6, -9,
    -5, -1, -4, 5, -13, 7, -8, 10, 1, 5, 5, -13, 1, 0, 10, -13,
    9, 12, 10, -1, 5, -8, 10, -9, -1, 11, 1, -13, -9, -3, -6, 2,
    -1, -10, 1, 12, -13, 1, -8, -10, 8, -11, 10, -6, 2, -13, 3, -6,
    7, -13, 12, -9, -10, -10, -5, -7, -10, -8, -8, -13, 4, -6, 8, 5,
    3, 12, 8, -13, -4, 2, -3, -3, 5, -13, 10, -12, 4, -13, 5, -1,
    -9, 9, -4, 3, 0, 3, 3, -9, -12, 1, -6, 1, 3, 2, 4, -8,
    -10, -10, -10, 9, 8, -13, 12, 12, -8, -12, -6, -5, 2, 2, 3, 7,
    10, 6, 11, -8, 6, 8, 8, -12, -7, 10, -6, 5, -3, -9, -3, 9,
    -1, -13, -1, 5, -3, -7, -3, 4, -8, -2, -8, 3, 4, 2, 12, 12,
    2, -5, 3, 11, 6, -9, 11, -13, 3, -1, 7, 12, 11, -1, 12, 4,
    -3, 0, -3, 6, 4, -11, 4, 12, 2, -4, 2, 1, -10, -6, -8, 1,
    -13, 7, -11, 1, -13, 12, -11, -13, 6, 0, 11, -13, 0, -1, 1, 4,
    -13, 3, -9, -2, -9, 8, -6, -3, -13, -6, -8, -2, 5, -9, 8, 10,
    2, 7, 3, -9, -1, -6, -1, -1, 9, 5, 11, -2, 11, -3, 12, -8,
    3, 0, 3, 5, -1, 4, 0, 10, 3, -6, 4, 5, -13, 0, -10, 5,
    5, 8, 12, 11, 8, 9, 9, -6, 7, -4, 8, -12, -10, 4, -10, 9,
    7, 3, 12, 4, 9, -7, 10, -2, 7, 0, 12, -2, -1, -6, 0, -11,
};

constexpr int kPatchSize = 31;
constexpr int kHalfPatch = kPatchSize / 2;
constexpr int kHarrisBlock = 7;
constexpr float kHarrisK = 0.04f;

constexpr std::array<std::array<int, 2>, 16> kCircle = {{{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1}, {2, 2}, {1, 3},
                                                        {0, 3}, {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

struct Candidate {
  int x = 0;
  int y = 0;
  int fast_score = 0;
  float harris = 0.f;
};

/// Largest threshold at which the pixel still passes the 9-of-16 segment test, minus one;
/// 0 when it is not a corner at `threshold`.
int fast_score(const GrayImage& img, int x, int y, int threshold) {
  const int center = img.at(x, y);
  std::array<int, 16> diff{};
  for (int i = 0; i < 16; ++i) diff[i] = img.at(x + kCircle[i][0], y + kCircle[i][1]) - center;
  int best = 0;
  for (int start = 0; start < 16; ++start) {
    int min_bright = 255, min_dark = 255;
    for (int k = 0; k < 9; ++k) {
      const int d = diff[(start + k) % 16];
      min_bright = std::min(min_bright, d);
      min_dark = std::min(min_dark, -d);
    }
    best = std::max({best, min_bright, min_dark});
  }
  return best > threshold ? best - 1 : 0;
}

/// Cheap rejection on the four compass points before the full arc test.
bool fast_maybe(const GrayImage& img, int x, int y, int threshold) {
  const int c = img.at(x, y);
  int bright = 0, dark = 0;
  for (int i : {0, 4, 8, 12}) {
    const int v = img.at(x + kCircle[i][0], y + kCircle[i][1]);
    bright += v > c + threshold;
    dark += v < c - threshold;
  }
  return bright >= 2 || dark >= 2;
}

std::vector<Candidate> fast_corners(const GrayImage& img, int threshold, int border) {
  const int w = img.width, h = img.height;
  std::vector<int> score(static_cast<std::size_t>(w) * h, 0);
  const int lo = std::max(3, border - 3);
  for (int y = lo; y < h - lo; ++y) {
    for (int x = lo; x < w - lo; ++x) {
      if (fast_maybe(img, x, y, threshold)) score[static_cast<std::size_t>(y) * w + x] = fast_score(img, x, y, threshold);
    }
  }
  std::vector<Candidate> out;
  for (int y = border; y < h - border; ++y) {
    for (int x = border; x < w - border; ++x) {
      const int s = score[static_cast<std::size_t>(y) * w + x];
      if (s == 0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx || dy) && score[static_cast<std::size_t>(y + dy) * w + x + dx] >= s) {
            // ties resolved toward the earlier raster position
            if (score[static_cast<std::size_t>(y + dy) * w + x + dx] > s || dy < 0 || (dy == 0 && dx < 0)) {
              is_max = false;
              break;
            }
          }
        }
      }
      if (is_max) out.push_back({x, y, s, 0.f});
    }
  }
  return out;
}

float harris_response(const GrayImage& img, int cx, int cy) {
  const int r = kHarrisBlock / 2;
  double a = 0, b = 0, c = 0;
  for (int y = cy - r; y <= cy + r; ++y) {
    for (int x = cx - r; x <= cx + r; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<int>(img.at(x + dx, y + dy)); };
      const int ix = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const int iy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      a += static_cast<double>(ix) * ix;
      b += static_cast<double>(iy) * iy;
      c += static_cast<double>(ix) * iy;
    }
  }
  const double scale = 1.0 / (4.0 * kHarrisBlock * 255.0);
  const double s4 = scale * scale * scale * scale;
  return static_cast<float>((a * b - c * c - kHarrisK * (a + b) * (a + b)) * s4);
}

std::array<int, kHalfPatch + 2> circular_extent() {
  std::array<int, kHalfPatch + 2> umax{};
  const int vmax = static_cast<int>(std::floor(kHalfPatch * std::sqrt(2.0) / 2 + 1));
  const int vmin = static_cast<int>(std::ceil(kHalfPatch * std::sqrt(2.0) / 2));
  for (int v = 0; v <= vmax; ++v) umax[v] = static_cast<int>(std::lround(std::sqrt(double(kHalfPatch * kHalfPatch - v * v))));
  for (int v = kHalfPatch, v0 = 0; v >= vmin; --v) {
    while (umax[v0] == umax[v0 + 1]) ++v0;
    umax[v] = v0;
    ++v0;
  }
  return umax;
}

float intensity_centroid_angle(const GrayImage& img, int cx, int cy) {
  static const auto umax = circular_extent();
  long m01 = 0, m10 = 0;
  for (int u = -kHalfPatch; u <= kHalfPatch; ++u) m10 += u * img.at(cx + u, cy);
  for (int v = 1; v <= kHalfPatch; ++v) {
    long v_sum = 0;
    const int d = umax[v];
    for (int u = -d; u <= d; ++u) {
      const int below = img.at(cx + u, cy + v);
      const int above = img.at(cx + u, cy - v);
      v_sum += below - above;
      m10 += u * (below + above);
    }
    m01 += v * v_sum;
  }
  double angle = std::atan2(static_cast<double>(m01), static_cast<double>(m10));
  if (angle < 0) angle += 2 * std::numbers::pi;
  if (angle >= 2 * std::numbers::pi) angle = 0;
  return static_cast<float>(angle);
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

/// 7x7 Gaussian, sigma 2, reflect-101 border.
GrayImage blur_for_brief(const GrayImage& img) {
  constexpr int r = 3;
  std::array<double, 2 * r + 1> k{};
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-(i * i) / (2.0 * 2.0 * 2.0));
  for (auto& v : k) v /= sum;
  std::vector<double> tmp(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * img.at(reflect101(x + i, img.width), y);
      tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
    }
  }
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[static_cast<std::size_t>(reflect101(y + i, img.height)) * img.width + x];
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0L, 255L));
    }
  }
  return out;
}

void steered_brief(const GrayImage& blurred, int cx, int cy, float angle, std::span<std::uint8_t> out) {
  const double c = std::cos(angle), s = std::sin(angle);
  auto sample = [&](int px, int py) {
    const int x = static_cast<int>(std::lround(px * c - py * s));
    const int y = static_cast<int>(std::lround(px * s + py * c));
    return blurred.at(cx + x, cy + y);
  };
  for (int byte = 0; byte < kOrbDescriptorBits / 8; ++byte) {
    int v = 0;
    for (int bit = 0; bit < 8; ++bit) {
      const int* p = &kBriefPattern[(byte * 8 + bit) * 4];
      v |= (sample(p[0], p[1]) < sample(p[2], p[3])) << bit;
    }
    out[byte] = static_cast<std::uint8_t>(v);
  }
}

struct Level {
  GrayImage image;
  float scale = 1.f;
};

}  // namespace

FeatureSet detect_orb(const GrayImage& img, int max_features) {
  OrbParams p;
  p.max_features = max_features;
  return detect_orb(img, p);
}

FeatureSet detect_orb(const GrayImage& img, const OrbParams& params) {
  FeatureSet result;
  result.detector = DetectorKind::ORB;
  result.descriptors = DescriptorMatrix(0, kOrbDescriptorBits);
  if (img.empty() || params.max_features <= 0) return result;

  const int border = params.edge_threshold;
  std::vector<Level> levels;
  for (int l = 0; l < params.levels; ++l) {
    const float scale = std::pow(params.scale_factor, static_cast<float>(l));
    const int w = static_cast<int>(std::lround(img.width / scale));
    const int h = static_cast<int>(std::lround(img.height / scale));
    if (w <= 2 * border || h <= 2 * border) break;
    levels.push_back({l == 0 ? img : resize_bilinear(img, w, h), scale});
  }
  if (levels.empty()) return result;

  // Geometric per-level budget, as in the reference ORB.
  const int n_levels = static_cast<int>(levels.size());
  std::vector<int> quota(n_levels, 0);
  {
    const double fac = 1.0 / params.scale_factor;
    double desired = params.max_features * (1 - fac) / (1 - std::pow(fac, static_cast<double>(params.levels)));
    int sum = 0;
    for (int l = 0; l < n_levels - 1; ++l) {
      quota[l] = static_cast<int>(std::lround(desired));
      sum += quota[l];
      desired *= fac;
    }
    quota[n_levels - 1] = std::max(params.max_features - sum, 0);
  }

  struct Ranked {
    Candidate c;
    int level;
  };
  std::vector<Ranked> kept, spare;
  for (int l = 0; l < n_levels; ++l) {
    auto corners = fast_corners(levels[l].image, params.fast_threshold, border);
    std::stable_sort(corners.begin(), corners.end(),
                     [](const Candidate& a, const Candidate& b) { return a.fast_score > b.fast_score; });
    if (corners.size() > static_cast<std::size_t>(2 * params.max_features)) corners.resize(2 * params.max_features);
    for (auto& c : corners) c.harris = harris_response(levels[l].image, c.x, c.y);
    std::stable_sort(corners.begin(), corners.end(), [](const Candidate& a, const Candidate& b) { return a.harris > b.harris; });
    for (std::size_t i = 0; i < corners.size(); ++i) {
      (static_cast<int>(i) < quota[l] ? kept : spare).push_back({corners[i], l});
    }
  }
  auto by_response = [](const Ranked& a, const Ranked& b) {
    if (a.c.harris != b.c.harris) return a.c.harris > b.c.harris;
    if (a.level != b.level) return a.level < b.level;
    return a.c.y != b.c.y ? a.c.y < b.c.y : a.c.x < b.c.x;
  };
  // Levels that fall short of their budget hand the remainder to the strongest spares.
  if (kept.size() < static_cast<std::size_t>(params.max_features)) {
    std::stable_sort(spare.begin(), spare.end(), by_response);
    const std::size_t take = std::min(spare.size(), params.max_features - kept.size());
    kept.insert(kept.end(), spare.begin(), spare.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::stable_sort(kept.begin(), kept.end(), by_response);
  if (kept.size() > static_cast<std::size_t>(params.max_features)) kept.resize(params.max_features);

  std::vector<GrayImage> blurred(n_levels);
  result.keypoints.reserve(kept.size());
  result.descriptors = DescriptorMatrix(kept.size(), kOrbDescriptorBits);
  std::array<std::uint8_t, kOrbDescriptorBits / 8> desc{};
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& [c, l] = kept[i];
    if (blurred[l].empty()) blurred[l] = blur_for_brief(levels[l].image);
    Keypoint kp;
    kp.x = c.x * levels[l].scale;
    kp.y = c.y * levels[l].scale;
    kp.scale = kPatchSize * levels[l].scale;
    kp.orientation = intensity_centroid_angle(levels[l].image, c.x, c.y);
    kp.response = c.harris;
    kp.level = l;
    steered_brief(blurred[l], c.x, c.y, kp.orientation, desc);
    result.descriptors.set_row(i, desc);
    result.keypoints.push_back(kp);
  }
  return result;
}

}  // namespace eyectl
