#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "eyectl/core.hpp"
#include "eyectl/image.hpp"

namespace eyectl {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidCalibration unless fx, fy > 0 and the principal point lies in the image.
  void validate() const;
  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

enum class Frame { Depth, Color, World };
std::string_view to_string(Frame f);

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  Frame frame = Frame::Depth;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Proper rigid motion mapping points from `from` into `to`.
class RigidTransform {
 public:
  RigidTransform() = default;
  /// Throws InvalidCalibration unless R^T R = I and det R = +1 within kRotationTolerance.
  RigidTransform(const Eigen::Matrix3d& R, const Eigen::Vector3d& t, Frame from = Frame::Depth, Frame to = Frame::Color);

  static constexpr double kRotationTolerance = 1e-9;

  const Eigen::Matrix3d& rotation() const { return R_; }
  const Eigen::Vector3d& translation() const { return t_; }
  Frame from() const { return from_; }
  Frame to() const { return to_; }
  Eigen::Matrix4d homogeneous() const;
  RigidTransform inverse() const;

 private:
  Eigen::Matrix3d R_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_ = Eigen::Vector3d::Zero();
  Frame from_ = Frame::Depth;
  Frame to_ = Frame::Color;
};

/// Raw 16-bit depth; metres = raw * depth_scale, raw 0 marks a missing return.
using DepthImage = Gray16Image;

struct CameraRig {
  Intrinsics depth;
  Intrinsics color;
  RigidTransform depth_to_color;
  double depth_scale = 0.001;  // metres per raw unit

  void validate() const;
};

/// Back-projects a depth pixel: Z * K^-1 (u, v, 1). Empty for raw depth 0; throws OutOfBounds
/// outside the depth image.
std::optional<Point3> deproject(int u, int v, const DepthImage& depth, const Intrinsics& k, double depth_scale);
/// Continuous-coordinate variant with metric depth supplied directly.
Point3 deproject(double u, double v, double z, const Intrinsics& k, Frame frame = Frame::Depth);

/// R p + t. Throws std::invalid_argument when p is not in t.from().
Point3 transform(const Point3& p, const RigidTransform& t);

struct Pixel2 {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole projection; empty when the point is not in front of the camera (Z <= 0).
std::optional<Pixel2> project(const Point3& p, const Intrinsics& k);

/// Inclusive on every edge.
bool in_box(double u, double v, const BoundingBox& box);

/// Depth pixels, in row-major order, whose colour-image projection lands inside `color_box`.
/// Points are returned in the colour frame.
std::vector<Point3> extract_object_cloud(const DepthImage& depth, const CameraRig& rig, const BoundingBox& color_box);

/// Centroid of the cloud mapped into the world frame. Throws EmptyCloud.
Point3 object_pose_world(std::span<const Point3> cloud, const RigidTransform& world_from_color);

CameraRig load_calibration(const std::filesystem::path& path);
CameraRig parse_calibration(std::string_view json_text);
void save_calibration(const std::filesystem::path& path, const CameraRig& rig);

/// ASCII XYZ, one point per line, metres with six decimals.
void write_xyz(const std::filesystem::path& path, std::span<const Point3> cloud);

struct CalibrationReport {
  double max_roundtrip_px = 0.0;  // depth -> colour -> depth reprojection error
  std::size_t samples = 0;
};

/// Validates the rig, then pushes every `stride`-th depth pixel at `depth_m` through
/// depth -> colour -> depth and records the worst pixel error.
CalibrationReport check_calibration(const CameraRig& rig, double depth_m = 1.0, int stride = 1);

}  // namespace eyectl
