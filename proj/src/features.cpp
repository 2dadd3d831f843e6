#include "eyectl/features.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "eyectl/error.hpp"

namespace eyectl {

DescriptorMatrix::DescriptorMatrix(std::size_t rows, int bits)
    : rows_(rows), bits_(bits), stride_((bits + 7) / 8), data_(rows * static_cast<std::size_t>((bits + 7) / 8), 0) {}

void DescriptorMatrix::mask_padding(std::size_t i) {
  const int tail = bits_ % 8;
  if (tail != 0) data_[i * stride_ + stride_ - 1] &= static_cast<std::uint8_t>((1u << tail) - 1u);
}

void DescriptorMatrix::set_row(std::size_t i, std::span<const std::uint8_t> bytes) {
  if (i >= rows_) throw std::out_of_range("descriptor row out of range");
  if (bytes.size() != static_cast<std::size_t>(stride_)) throw WidthMismatch("descriptor row has wrong byte width");
  std::copy(bytes.begin(), bytes.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * stride_));
  mask_padding(i);
}

void DescriptorMatrix::push_back(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != static_cast<std::size_t>(stride_)) throw WidthMismatch("descriptor row has wrong byte width");
  data_.insert(data_.end(), bytes.begin(), bytes.end());
  ++rows_;
  mask_padding(rows_ - 1);
}

DescriptorMatrix DescriptorMatrix::select(std::span<const std::size_t> keep) const {
  DescriptorMatrix out(0, bits_);
  out.data_.reserve(keep.size() * stride_);
  for (std::size_t i : keep) out.push_back(row(i));
  return out;
}

FeatureSet detect_features(const GrayImage& img, DetectorKind kind) {
  if (kind == DetectorKind::ORB) return detect_orb(img);
  if (img.width < kAkazeMinSide || img.height < kAkazeMinSide) {
    FeatureSet empty;
    empty.detector = DetectorKind::AKAZE;
    empty.descriptors = DescriptorMatrix(0, kAkazeDescriptorBits);
    return empty;
  }
  return detect_akaze(img);
}

void dump_features(const std::filesystem::path& path, const FeatureSet& set) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t i = 0; i < set.keypoints.size(); ++i) {
    const auto& kp = set.keypoints[i];
    std::string hex;
    for (std::uint8_t b : set.descriptors.row(i)) {
      char buf[3];
      std::snprintf(buf, sizeof buf, "%02x", b);
      hex += buf;
    }
    nlohmann::ordered_json j;
    j["x"] = kp.x;
    j["y"] = kp.y;
    j["scale"] = kp.scale;
    j["orientation"] = kp.orientation;
    j["response"] = kp.response;
    j["level"] = kp.level;
    j["desc"] = hex;
    out << j.dump() << '\n';
  }
}

}  // namespace eyectl
