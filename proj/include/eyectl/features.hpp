#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eyectl/config.hpp"
#include "eyectl/image.hpp"

namespace eyectl {

struct Keypoint {
  float x = 0.f;
  float y = 0.f;
  float scale = 0.f;        // support diameter in level-0 pixels
  float orientation = 0.f;  // radians, [0, 2pi)
  float response = 0.f;
  int level = 0;            // pyramid level (ORB) or evolution index (AKAZE)
};

/// Fixed-width binary descriptors, one row per keypoint. Bits past `bits()` in the last
/// byte of a row are always zero, so byte-wise popcount never sees padding.
class DescriptorMatrix {
 public:
  DescriptorMatrix() = default;
  DescriptorMatrix(std::size_t rows, int bits);

  std::size_t rows() const { return rows_; }
  int bits() const { return bits_; }
  int stride() const { return stride_; }
  bool empty() const { return rows_ == 0; }

  std::span<const std::uint8_t> row(std::size_t i) const { return {data_.data() + i * stride_, static_cast<std::size_t>(stride_)}; }
  std::span<std::uint8_t> row(std::size_t i) { return {data_.data() + i * stride_, static_cast<std::size_t>(stride_)}; }
  void set_row(std::size_t i, std::span<const std::uint8_t> bytes);
  void push_back(std::span<const std::uint8_t> bytes);
  /// Keeps rows whose index appears in `keep` (ascending).
  DescriptorMatrix select(std::span<const std::size_t> keep) const;

  friend bool operator==(const DescriptorMatrix&, const DescriptorMatrix&) = default;

 private:
  void mask_padding(std::size_t i);

  std::size_t rows_ = 0;
  int bits_ = 0;
  int stride_ = 0;
  std::vector<std::uint8_t> data_;
};

inline constexpr int kOrbDescriptorBits = 256;
inline constexpr int kAkazeDescriptorBits = 486;   // 3-channel M-LDB
inline constexpr int kAkazeDescriptorBytes = 61;   // 488 bits, 2 zero pad bits

struct FeatureSet {
  std::vector<Keypoint> keypoints;
  DescriptorMatrix descriptors;
  DetectorKind detector = DetectorKind::ORB;

  std::size_t size() const { return keypoints.size(); }
};

struct OrbParams {
  int max_features = 500;
  float scale_factor = 1.2f;
  int levels = 8;
  int fast_threshold = 20;
  int edge_threshold = 31;
};

/// FAST-9 corners over a scale pyramid, ranked by Harris response, steered BRIEF descriptors
/// oriented by intensity centroid.
FeatureSet detect_orb(const GrayImage& img, int max_features = 500);
FeatureSet detect_orb(const GrayImage& img, const OrbParams& params);

struct AkazeParams {
  float threshold = 0.001f;
  int octaves = 4;
  int sublevels = 4;
  float base_sigma = 1.6f;
  float derivative_factor = 1.5f;
  float contrast_percentile = 0.7f;
  int contrast_bins = 300;
};

/// Minimum side length accepted by detect_akaze.
inline constexpr int kAkazeMinSide = 64;

/// Determinant-of-Hessian extrema of a FED nonlinear scale space, described with 3-channel
/// M-LDB. Throws ImageTooSmall below kAkazeMinSide on either side.
FeatureSet detect_akaze(const GrayImage& img, float threshold = 0.001f);
FeatureSet detect_akaze(const GrayImage& img, const AkazeParams& params);

/// Dispatches on cfg.detector with default detector parameters. Images too small for AKAZE
/// yield an empty set.
FeatureSet detect_features(const GrayImage& img, DetectorKind kind);

/// JSON-lines dump: one `{x, y, scale, orientation, response, level, desc}` per keypoint,
/// `desc` as lowercase hex.
void dump_features(const std::filesystem::path& path, const FeatureSet& set);

}  // namespace eyectl
