#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "eyectl/error.hpp"
#include "eyectl/features.hpp"

namespace eyectl {

namespace {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<float> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.f) {}
  float& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
  return i;
}

int replicate(int i, int n) { return std::clamp(i, 0, n - 1); }

template <typename Border>
Plane convolve_rows(const Plane& src, std::span<const std::pair<int, float>> taps, Border border) {
  Plane out(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    const float* row = &src.v[static_cast<std::size_t>(y) * src.w];
    float* dst = &out.v[static_cast<std::size_t>(y) * src.w];
    for (int x = 0; x < src.w; ++x) {
      float acc = 0.f;
      for (const auto& [off, k] : taps) acc += k * row[border(x + off, src.w)];
      dst[x] = acc;
    }
  }
  return out;
}

template <typename Border>
Plane convolve_cols(const Plane& src, std::span<const std::pair<int, float>> taps, Border border) {
  Plane out(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    float* dst = &out.v[static_cast<std::size_t>(y) * src.w];
    for (const auto& [off, k] : taps) {
      const float* row = &src.v[static_cast<std::size_t>(border(y + off, src.h)) * src.w];
      for (int x = 0; x < src.w; ++x) dst[x] += k * row[x];
    }
  }
  return out;
}

Plane gaussian(const Plane& src, float sigma) {
  int ksize = static_cast<int>(std::ceil(2.0f * (1.0f + (sigma - 0.8f) / 0.3f)));
  if (ksize % 2 == 0) ++ksize;
  const int r = ksize / 2;
  std::vector<std::pair<int, float>> taps;
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += std::exp(-(i * i) / (2.0 * sigma * sigma));
  for (int i = -r; i <= r; ++i) taps.emplace_back(i, static_cast<float>(std::exp(-(i * i) / (2.0 * sigma * sigma)) / sum));
  return convolve_cols(convolve_rows(src, taps, replicate), taps, replicate);
}

/// Scharr-type first derivative with its support widened to `scale` pixels; the result
/// estimates d/dx (or d/dy) in pixel units.
Plane scharr(const Plane& src, bool along_x, int scale) {
  const float w = 10.0f / 3.0f;
  const float norm = 1.0f / (2.0f * scale * (w + 2.0f));
  const std::array<std::pair<int, float>, 3> smooth = {{{-scale, norm}, {0, w * norm}, {scale, norm}}};
  const std::array<std::pair<int, float>, 2> deriv = {{{-scale, -1.f}, {scale, 1.f}}};
  if (along_x) return convolve_cols(convolve_rows(src, deriv, reflect101), smooth, reflect101);
  return convolve_cols(convolve_rows(src, smooth, reflect101), deriv, reflect101);
}

/// Area-weighted downsampling to the given size.
Plane area_resize(const Plane& src, int w, int h) {
  const double sx = static_cast<double>(src.w) / w;
  const double sy = static_cast<double>(src.h) / h;
  auto weights = [](int n_dst, int n_src, double s) {
    std::vector<std::vector<std::pair<int, float>>> out(n_dst);
    for (int i = 0; i < n_dst; ++i) {
      const double a = i * s, b = (i + 1) * s;
      for (int k = static_cast<int>(std::floor(a)); k < std::min<double>(std::ceil(b), n_src); ++k) {
        const double ov = std::min<double>(b, k + 1) - std::max<double>(a, k);
        if (ov > 1e-9) out[i].emplace_back(k, static_cast<float>(ov / s));
      }
    }
    return out;
  };
  const auto wx = weights(w, src.w, sx);
  const auto wy = weights(h, src.h, sy);
  Plane tmp(w, src.h);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = 0.f;
      for (const auto& [k, c] : wx[x]) acc += c * src.at(k, y);
      tmp.at(x, y) = acc;
    }
  }
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (const auto& [k, c] : wy[y]) {
      for (int x = 0; x < w; ++x) out.at(x, y) += c * tmp.at(x, k);
    }
  }
  return out;
}

/// Perona-Malik g2 conductance.
Plane pm_g2(const Plane& lx, const Plane& ly, float k) {
  Plane out(lx.w, lx.h);
  const float inv_k2 = 1.0f / (k * k);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = 1.0f / (1.0f + (lx.v[i] * lx.v[i] + ly.v[i] * ly.v[i]) * inv_k2);
  return out;
}

/// Gradient-magnitude percentile used as the diffusion contrast parameter.
float contrast_factor(const Plane& img, float percentile, int nbins) {
  const Plane smooth = gaussian(img, 1.0f);
  const Plane lx = scharr(smooth, true, 1);
  const Plane ly = scharr(smooth, false, 1);
  float hmax = 0.f;
  std::vector<float> mag;
  mag.reserve(static_cast<std::size_t>(img.w) * img.h);
  for (int y = 1; y < img.h - 1; ++y) {
    for (int x = 1; x < img.w - 1; ++x) {
      const float m = std::sqrt(lx.at(x, y) * lx.at(x, y) + ly.at(x, y) * ly.at(x, y));
      mag.push_back(m);
      hmax = std::max(hmax, m);
    }
  }
  if (hmax <= 0.f) return 0.03f;
  std::vector<int> hist(nbins, 0);
  int npoints = 0;
  for (float m : mag) {
    if (m == 0.f) continue;
    int bin = static_cast<int>(std::floor(nbins * (m / hmax)));
    if (bin == nbins) --bin;
    ++hist[bin];
    ++npoints;
  }
  const float nthreshold = npoints * percentile;
  int k = 0, nelements = 0;
  for (; k < nbins && nelements < nthreshold; ++k) nelements += hist[k];
  return nelements < nthreshold ? 0.03f : hmax * (static_cast<float>(k) / nbins);
}

/// One explicit diffusion step with conductance `c` (Neumann boundaries).
void diffusion_step(Plane& l, const Plane& c, float tau) {
  Plane step(l.w, l.h);
  const float half = 0.5f * tau;
  for (int y = 0; y < l.h; ++y) {
    for (int x = 0; x < l.w; ++x) {
      const float lc = l.at(x, y), cc = c.at(x, y);
      float flux = 0.f;
      if (x + 1 < l.w) flux += (cc + c.at(x + 1, y)) * (l.at(x + 1, y) - lc);
      if (x > 0) flux -= (c.at(x - 1, y) + cc) * (lc - l.at(x - 1, y));
      if (y + 1 < l.h) flux += (cc + c.at(x, y + 1)) * (l.at(x, y + 1) - lc);
      if (y > 0) flux -= (c.at(x, y - 1) + cc) * (lc - l.at(x, y - 1));
      step.at(x, y) = half * flux;
    }
  }
  for (std::size_t i = 0; i < l.v.size(); ++i) l.v[i] += step.v[i];
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Fast Explicit Diffusion step sizes covering diffusion time `t` with stability limit
/// `tau_max`, reordered with the kappa/prime scheme for numerical stability.
std::vector<float> fed_steps(float t, float tau_max) {
  const int n = static_cast<int>(std::ceil(std::sqrt(3.0 * t / tau_max + 0.25) - 0.5 - 1.0e-8) + 0.5);
  if (n <= 0) return {};
  const double scale = 3.0 * t / (tau_max * n * (n + 1));
  const double c = 1.0 / (4.0 * n + 2.0);
  const double d = scale * tau_max / 2.0;
  std::vector<float> tauh(n);
  for (int k = 0; k < n; ++k) {
    const double h = std::cos(std::numbers::pi * (2.0 * k + 1.0) * c);
    tauh[k] = static_cast<float>(d / (h * h));
  }
  std::vector<float> tau(n);
  const int kappa = n / 2;
  int prime = n + 1;
  while (!is_prime(prime)) ++prime;
  for (int l = 0, k = 0; l < n; ++l) {
    int index = 0;
    while ((index = ((k + 1) * kappa) % prime - 1) >= n) ++k;
    tau[l] = tauh[index];
    ++k;
  }
  return tau;
}

struct Evolution {
  Plane lt, lsmooth, lx, ly, lxx, lxy, lyy, ldet;
  float esigma = 0.f;
  float etime = 0.f;
  int octave = 0;
  int sublevel = 0;
  int sigma_size = 1;
};

constexpr float kMldbRadius = 10.0f * std::numbers::sqrt2_v<float>;  // pattern half-size * sqrt(2)
constexpr int kPatternSize = 10;

struct RawPoint {
  float x = 0.f, y = 0.f;  // level-0 pixels
  float size = 0.f;        // esigma * derivative factor
  float response = 0.f;
  int level = 0;
};

/// True when every descriptor and orientation sample around (x, y) on this level lies inside
/// the level image.
bool inside_sampling_border(const Evolution& e, float xl, float yl) {
  const float reach = kMldbRadius * e.sigma_size + 1.0f;
  return xl - reach >= 0.f && yl - reach >= 0.f && xl + reach <= e.lt.w - 1 && yl + reach <= e.lt.h - 1;
}

std::vector<RawPoint> find_extrema(const std::vector<Evolution>& evo, const AkazeParams& p) {
  constexpr float kMinThreshold = 0.00001f;
  std::vector<RawPoint> aux;
  for (std::size_t i = 0; i < evo.size(); ++i) {
    const auto& e = evo[i];
    const auto& d = e.ldet;
    const float ratio = static_cast<float>(1 << e.octave);
    for (int y = 1; y < d.h - 1; ++y) {
      for (int x = 1; x < d.w - 1; ++x) {
        const float v = d.at(x, y);
        if (!(v > p.threshold && v >= kMinThreshold)) continue;
        if (!(v > d.at(x - 1, y) && v > d.at(x + 1, y) && v > d.at(x - 1, y - 1) && v > d.at(x, y - 1) &&
              v > d.at(x + 1, y - 1) && v > d.at(x - 1, y + 1) && v > d.at(x, y + 1) && v > d.at(x + 1, y + 1)))
          continue;

        RawPoint pt{static_cast<float>(x) * ratio, static_cast<float>(y) * ratio, e.esigma * p.derivative_factor,
                    std::fabs(v), static_cast<int>(i)};
        bool keep = true;
        std::ptrdiff_t replace = -1;
        for (std::size_t k = 0; k < aux.size(); ++k) {
          if (aux[k].level != pt.level && aux[k].level != pt.level - 1) continue;
          const float dx = pt.x - aux[k].x, dy = pt.y - aux[k].y;
          if (dx * dx + dy * dy <= pt.size * pt.size) {
            if (pt.response > aux[k].response) {
              replace = static_cast<std::ptrdiff_t>(k);
            } else {
              keep = false;
            }
            break;
          }
        }
        if (!keep || !inside_sampling_border(e, static_cast<float>(x), static_cast<float>(y))) continue;
        if (replace >= 0) {
          aux[replace] = pt;
        } else {
          aux.push_back(pt);
        }
      }
    }
  }
  // Suppress points dominated by a stronger neighbour one level up.
  std::vector<RawPoint> out;
  for (std::size_t i = 0; i < aux.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = i + 1; j < aux.size(); ++j) {
      if (aux[j].level != aux[i].level + 1) continue;
      const float dx = aux[i].x - aux[j].x, dy = aux[i].y - aux[j].y;
      if (dx * dx + dy * dy <= aux[i].size * aux[i].size && aux[i].response < aux[j].response) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(aux[i]);
  }
  return out;
}

/// Solves a 3x3 (or 2x2 when `dims` == 2) symmetric system by Cramer's rule.
bool solve_sym(int dims, const std::array<double, 9>& a, const std::array<double, 3>& b, std::array<double, 3>& x) {
  if (dims == 2) {
    const double det = a[0] * a[4] - a[1] * a[3];
    if (std::fabs(det) < 1e-20) return false;
    x = {(b[0] * a[4] - a[1] * b[1]) / det, (a[0] * b[1] - b[0] * a[3]) / det, 0.0};
    return true;
  }
  auto det3 = [](const std::array<double, 9>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6]);
  };
  const double det = det3(a);
  if (std::fabs(det) < 1e-30) return false;
  for (int c = 0; c < 3; ++c) {
    auto m = a;
    for (int r = 0; r < 3; ++r) m[r * 3 + c] = b[r];
    x[c] = det3(m) / det;
  }
  return true;
}

/// Quadratic fit of the detector response around each extremum: across x, y and, when the
/// neighbouring levels share the resolution, across scale as well.
std::vector<Keypoint> refine(const std::vector<Evolution>& evo, const std::vector<RawPoint>& pts, const AkazeParams& p) {
  std::vector<Keypoint> out;
  out.reserve(pts.size());
  for (const auto& pt : pts) {
    const auto& e = evo[pt.level];
    const float ratio = static_cast<float>(1 << e.octave);
    const int x = static_cast<int>(std::lround(pt.x / ratio));
    const int y = static_cast<int>(std::lround(pt.y / ratio));
    const auto& d = e.ldet;
    const bool has_prev = pt.level > 0 && evo[pt.level - 1].octave == e.octave;
    const bool has_next = pt.level + 1 < static_cast<int>(evo.size()) && evo[pt.level + 1].octave == e.octave;
    const int dims = has_prev && has_next ? 3 : 2;

    const double c = d.at(x, y);
    const double dx = 0.5 * (d.at(x + 1, y) - d.at(x - 1, y));
    const double dy = 0.5 * (d.at(x, y + 1) - d.at(x, y - 1));
    const double dxx = d.at(x + 1, y) + d.at(x - 1, y) - 2.0 * c;
    const double dyy = d.at(x, y + 1) + d.at(x, y - 1) - 2.0 * c;
    const double dxy = 0.25 * (d.at(x + 1, y + 1) + d.at(x - 1, y - 1) - d.at(x + 1, y - 1) - d.at(x - 1, y + 1));
    std::array<double, 9> a{dxx, dxy, 0, dxy, dyy, 0, 0, 0, 1};
    std::array<double, 3> b{-dx, -dy, 0};
    if (dims == 3) {
      const auto& dp = evo[pt.level - 1].ldet;
      const auto& dn = evo[pt.level + 1].ldet;
      const double ds = 0.5 * (dn.at(x, y) - dp.at(x, y));
      const double dss = dn.at(x, y) + dp.at(x, y) - 2.0 * c;
      const double dxs = 0.25 * (dn.at(x + 1, y) - dn.at(x - 1, y) - dp.at(x + 1, y) + dp.at(x - 1, y));
      const double dys = 0.25 * (dn.at(x, y + 1) - dn.at(x, y - 1) - dp.at(x, y + 1) + dp.at(x, y - 1));
      a = {dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss};
      b = {-dx, -dy, -ds};
    }
    std::array<double, 3> off{};
    if (!solve_sym(dims, a, b, off)) continue;
    if (std::fabs(off[0]) > 1.0 || std::fabs(off[1]) > 1.0 || std::fabs(off[2]) > 1.0) continue;
    const float xl = static_cast<float>(x + off[0]);
    const float yl = static_cast<float>(y + off[1]);
    if (!inside_sampling_border(e, xl, yl)) continue;

    Keypoint kp;
    kp.x = xl * ratio;
    kp.y = yl * ratio;
    const float sigma = e.esigma * std::pow(2.0f, static_cast<float>(off[2]) / p.sublevels);
    kp.scale = 2.0f * sigma * p.derivative_factor;
    kp.response = pt.response;
    kp.level = pt.level;
    out.push_back(kp);
  }
  return out;
}

/// 7x7 Gaussian (sigma 2.5) weights indexed by |offset|.
constexpr float kGauss25[7][7] = {
    {0.02546481f, 0.02350698f, 0.01849125f, 0.01239505f, 0.00708017f, 0.00344629f, 0.00142946f},
    {0.02350698f, 0.02169968f, 0.01706957f, 0.01144208f, 0.00653582f, 0.00318132f, 0.00131956f},
    {0.01849125f, 0.01706957f, 0.01342740f, 0.00900066f, 0.00514126f, 0.00250252f, 0.00103800f},
    {0.01239505f, 0.01144208f, 0.00900066f, 0.00603332f, 0.00344629f, 0.00167749f, 0.00069579f},
    {0.00708017f, 0.00653582f, 0.00514126f, 0.00344629f, 0.00196855f, 0.00095820f, 0.00039744f},
    {0.00344629f, 0.00318132f, 0.00250252f, 0.00167749f, 0.00095820f, 0.00046640f, 0.00019346f},
    {0.00142946f, 0.00131956f, 0.00103800f, 0.00069579f, 0.00039744f, 0.00019346f, 0.00008024f}};

float wrap_angle(float a) {
  constexpr float two_pi = 2.0f * std::numbers::pi_v<float>;
  a = std::fmod(a, two_pi);
  if (a < 0.f) a += two_pi;
  if (a >= two_pi) a = 0.f;
  return a;
}

/// Dominant gradient direction from a sliding pi/3 sector over the Gaussian-weighted
/// first derivatives within radius 6 * scale.
float main_orientation(const Evolution& e, float xl, float yl) {
  const int s = e.sigma_size;
  std::array<float, 109> rx{}, ry{}, ang{};
  int n = 0;
  for (int i = -6; i <= 6; ++i) {
    for (int j = -6; j <= 6; ++j) {
      if (i * i + j * j >= 36) continue;
      const int iy = static_cast<int>(std::lround(yl + j * s));
      const int ix = static_cast<int>(std::lround(xl + i * s));
      const float g = kGauss25[std::abs(i)][std::abs(j)];
      rx[n] = g * e.lx.at(ix, iy);
      ry[n] = g * e.ly.at(ix, iy);
      ang[n] = wrap_angle(std::atan2(ry[n], rx[n]));
      ++n;
    }
  }
  constexpr float two_pi = 2.0f * std::numbers::pi_v<float>;
  constexpr float sector = std::numbers::pi_v<float> / 3.0f;
  float best = 0.f, angle = 0.f;
  for (float a1 = 0.f; a1 < two_pi; a1 += 0.15f) {
    const float a2 = a1 + sector > two_pi ? a1 - 5.0f * sector : a1 + sector;
    float sx = 0.f, sy = 0.f;
    for (int k = 0; k < n; ++k) {
      const float a = ang[k];
      const bool in = a1 < a2 ? (a1 < a && a < a2) : ((a > 0.f && a < a2) || (a > a1 && a < two_pi));
      if (in) {
        sx += rx[k];
        sy += ry[k];
      }
    }
    const float m = sx * sx + sy * sy;
    if (m > best) {
      best = m;
      angle = wrap_angle(std::atan2(sy, sx));
    }
  }
  return angle;
}

/// Three-channel M-LDB: mean intensity and rotated mean derivatives over 2x2, 3x3 and 4x4
/// grids, compared pairwise within each grid.
void mldb_descriptor(const Evolution& e, float xl, float yl, float angle, std::span<std::uint8_t> desc) {
  std::fill(desc.begin(), desc.end(), 0);
  const float co = std::cos(angle), si = std::sin(angle);
  const float scale = static_cast<float>(e.sigma_size);
  constexpr double size_mult[3] = {1.0, 2.0 / 3.0, 1.0 / 2.0};
  std::array<float, 16 * 3> values{};
  int dpos = 0;
  for (int lvl = 0; lvl < 3; ++lvl) {
    const int step = static_cast<int>(std::ceil(kPatternSize * size_mult[lvl]));
    int count = 0;
    for (int i = -kPatternSize; i < kPatternSize; i += step) {
      for (int j = -kPatternSize; j < kPatternSize; j += step) {
        float di = 0.f, dx = 0.f, dy = 0.f;
        int ns = 0;
        for (int k = i; k < i + step; ++k) {
          for (int l = j; l < j + step; ++l) {
            const float sy = yl + (l * co * scale + k * si * scale);
            const float sx = xl + (-l * si * scale + k * co * scale);
            const int y1 = static_cast<int>(std::lround(sy));
            const int x1 = static_cast<int>(std::lround(sx));
            di += e.lt.at(x1, y1);
            const float gx = e.lx.at(x1, y1), gy = e.ly.at(x1, y1);
            dx += -gx * si + gy * co;
            dy += gx * co + gy * si;
            ++ns;
          }
        }
        values[3 * count + 0] = di / ns;
        values[3 * count + 1] = dx / ns;
        values[3 * count + 2] = dy / ns;
        ++count;
      }
    }
    for (int ch = 0; ch < 3; ++ch) {
      for (int a = 0; a < count; ++a) {
        for (int b = a + 1; b < count; ++b) {
          if (values[3 * a + ch] > values[3 * b + ch]) desc[dpos >> 3] |= static_cast<std::uint8_t>(1u << (dpos & 7));
          ++dpos;
        }
      }
    }
  }
}

}  // namespace

FeatureSet detect_akaze(const GrayImage& img, float threshold) {
  AkazeParams p;
  p.threshold = threshold;
  return detect_akaze(img, p);
}

FeatureSet detect_akaze(const GrayImage& img, const AkazeParams& p) {
  if (img.width < kAkazeMinSide || img.height < kAkazeMinSide) {
    throw ImageTooSmall("AKAZE needs at least " + std::to_string(kAkazeMinSide) + "x" + std::to_string(kAkazeMinSide) +
                        " pixels, got " + std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  Plane base(img.width, img.height);
  for (std::size_t i = 0; i < base.v.size(); ++i) base.v[i] = img.data[i] / 255.0f;

  std::vector<Evolution> evo;
  for (int o = 0; o < p.octaves; ++o) {
    const int w = img.width >> o, h = img.height >> o;
    if ((w < 24 || h < 24) && o != 0) break;
    for (int j = 0; j < p.sublevels; ++j) {
      Evolution e;
      e.esigma = p.base_sigma * std::pow(2.0f, static_cast<float>(j) / p.sublevels + o);
      e.etime = 0.5f * e.esigma * e.esigma;
      e.octave = o;
      e.sublevel = j;
      e.sigma_size = std::max(1, static_cast<int>(std::lround(e.esigma * p.derivative_factor / static_cast<float>(1 << o))));
      e.lt = Plane(w, h);
      evo.push_back(std::move(e));
    }
  }

  evo[0].lt = gaussian(base, p.base_sigma);
  evo[0].lsmooth = evo[0].lt;
  float k = contrast_factor(base, p.contrast_percentile, p.contrast_bins);
  for (std::size_t i = 1; i < evo.size(); ++i) {
    if (evo[i].octave > evo[i - 1].octave) {
      evo[i].lt = area_resize(evo[i - 1].lt, evo[i].lt.w, evo[i].lt.h);
      k *= 0.75f;
    } else {
      evo[i].lt = evo[i - 1].lt;
    }
    evo[i].lsmooth = gaussian(evo[i].lt, 1.0f);
    const Plane flow = pm_g2(scharr(evo[i].lsmooth, true, 1), scharr(evo[i].lsmooth, false, 1), k);
    for (float tau : fed_steps(evo[i].etime - evo[i - 1].etime, 0.25f)) diffusion_step(evo[i].lt, flow, tau);
  }

  for (auto& e : evo) {
    const int s = e.sigma_size;
    const Plane lx = scharr(e.lsmooth, true, s);
    const Plane ly = scharr(e.lsmooth, false, s);
    e.lxx = scharr(lx, true, s);
    e.lyy = scharr(ly, false, s);
    e.lxy = scharr(lx, false, s);
    const float s1 = static_cast<float>(s), s2 = s1 * s1;
    e.lx = lx;
    e.ly = ly;
    for (auto& v : e.lx.v) v *= s1;
    for (auto& v : e.ly.v) v *= s1;
    e.ldet = Plane(e.lt.w, e.lt.h);
    for (std::size_t i = 0; i < e.ldet.v.size(); ++i) {
      e.ldet.v[i] = (e.lxx.v[i] * e.lyy.v[i] - e.lxy.v[i] * e.lxy.v[i]) * s2 * s2;
    }
    e.lxx = {};
    e.lyy = {};
    e.lxy = {};
  }

  FeatureSet result;
  result.detector = DetectorKind::AKAZE;
  result.keypoints = refine(evo, find_extrema(evo, p), p);
  result.descriptors = DescriptorMatrix(result.keypoints.size(), kAkazeDescriptorBits);
  std::array<std::uint8_t, kAkazeDescriptorBytes> desc{};
  for (std::size_t i = 0; i < result.keypoints.size(); ++i) {
    auto& kp = result.keypoints[i];
    const auto& e = evo[kp.level];
    const float ratio = static_cast<float>(1 << e.octave);
    const float xl = kp.x / ratio, yl = kp.y / ratio;
    kp.orientation = main_orientation(e, xl, yl);
    mldb_descriptor(e, xl, yl, kp.orientation, desc);
    result.descriptors.set_row(i, desc);
  }
  return result;
}

}  // namespace eyectl
