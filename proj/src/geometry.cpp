#include "eyectl/geometry.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "eyectl/error.hpp"

namespace eyectl {

std::string_view to_string(Frame f) {
  switch (f) {
    case Frame::Depth: return "depth";
    case Frame::Color: return "color";
    case Frame::World: return "world";
  }
  return "depth";
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidCalibration("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidCalibration("image size must be positive");
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height) throw InvalidCalibration("principal point outside the image");
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& R, const Eigen::Vector3d& t, Frame from, Frame to)
    : R_(R), t_(t), from_(from), to_(to) {
  if (!R.allFinite() || !t.allFinite()) throw InvalidCalibration("rotation or translation is not finite");
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTolerance) throw InvalidCalibration("rotation is not orthonormal");
  if (std::fabs(R.determinant() - 1.0) > kRotationTolerance) throw InvalidCalibration("rotation determinant is not +1");
}

Eigen::Matrix4d RigidTransform::homogeneous() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = R_;
  m.topRightCorner<3, 1>() = t_;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.R_ = R_.transpose();
  inv.t_ = -(R_.transpose() * t_);
  inv.from_ = to_;
  inv.to_ = from_;
  return inv;
}

void CameraRig::validate() const {
  depth.validate();
  color.validate();
  if (!(depth_scale > 0.0)) throw InvalidCalibration("depth_scale must be positive");
}

std::optional<Point3> deproject(int u, int v, const DepthImage& depth, const Intrinsics& k, double depth_scale) {
  if (u < 0 || v < 0 || u >= depth.width || v >= depth.height) {
    throw OutOfBounds("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside the depth image");
  }
  const std::uint16_t raw = depth.at(u, v);
  if (raw == 0) return std::nullopt;
  return deproject(static_cast<double>(u), static_cast<double>(v), raw * depth_scale, k, Frame::Depth);
}

Point3 deproject(double u, double v, double z, const Intrinsics& k, Frame frame) {
  return {z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z, frame};
}

Point3 transform(const Point3& p, const RigidTransform& t) {
  if (p.frame != t.from()) {
    throw std::invalid_argument("point is in the " + std::string(to_string(p.frame)) + " frame, transform expects " +
                                std::string(to_string(t.from())));
  }
  // Row sums in a fixed order: results do not depend on how Eigen vectorises the product.
  const Eigen::Matrix3d& R = t.rotation();
  const Eigen::Vector3d& o = t.translation();
  double q[3];
  for (int i = 0; i < 3; ++i) q[i] = R(i, 0) * p.x + R(i, 1) * p.y + R(i, 2) * p.z + o(i);
  return {q[0], q[1], q[2], t.to()};
}

std::optional<Pixel2> project(const Point3& p, const Intrinsics& k) {
  if (!(p.z > 0.0)) return std::nullopt;
  return Pixel2{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

bool in_box(double u, double v, const BoundingBox& box) {
  return box.x <= u && u <= box.x + box.w && box.y <= v && v <= box.y + box.h;
}

std::vector<Point3> extract_object_cloud(const DepthImage& depth, const CameraRig& rig, const BoundingBox& color_box) {
  std::vector<Point3> cloud;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const auto pd = deproject(u, v, depth, rig.depth, rig.depth_scale);
      if (!pd) continue;
      const Point3 pc = transform(*pd, rig.depth_to_color);
      const auto px = project(pc, rig.color);
      if (px && in_box(px->u, px->v, color_box)) cloud.push_back(pc);
    }
  }
  return cloud;
}

Point3 object_pose_world(std::span<const Point3> cloud, const RigidTransform& world_from_color) {
  if (cloud.empty()) throw EmptyCloud("object cloud is empty");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud) sum += p.vec();
  const Eigen::Vector3d c = sum / static_cast<double>(cloud.size());
  return transform({c.x(), c.y(), c.z(), cloud.front().frame}, world_from_color);
}

namespace {

Intrinsics intrinsics_from(const nlohmann::json& j) {
  Intrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("w").get<int>();
  k.height = j.at("h").get<int>();
  return k;
}

nlohmann::ordered_json intrinsics_to(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"w", k.width}, {"h", k.height}};
}

}  // namespace

CameraRig parse_calibration(std::string_view json_text) {
  CameraRig rig;
  try {
    const auto j = nlohmann::json::parse(json_text);
    rig.depth = intrinsics_from(j.at("depth"));
    rig.color = intrinsics_from(j.at("color"));
    const auto r = j.at("depth_to_color").at("R").get<std::vector<double>>();
    const auto t = j.at("depth_to_color").at("t").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3) throw InvalidCalibration("depth_to_color needs R[9] and t[3]");
    Eigen::Matrix3d R;
    R << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    rig.depth_to_color = RigidTransform(R, Eigen::Vector3d(t[0], t[1], t[2]), Frame::Depth, Frame::Color);
    rig.depth_scale = j.at("depth_scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidCalibration(std::string("malformed calibration: ") + e.what());
  }
  rig.validate();
  return rig;
}

CameraRig load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

void save_calibration(const std::filesystem::path& path, const CameraRig& rig) {
  nlohmann::ordered_json j;
  j["depth"] = intrinsics_to(rig.depth);
  j["color"] = intrinsics_to(rig.color);
  std::vector<double> r;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) r.push_back(rig.depth_to_color.rotation()(i, c));
  const auto& t = rig.depth_to_color.translation();
  j["depth_to_color"] = {{"R", r}, {"t", {t.x(), t.y(), t.z()}}};
  j["depth_scale"] = rig.depth_scale;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_xyz(const std::filesystem::path& path, std::span<const Point3> cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[96];
  for (const auto& p : cloud) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", p.x, p.y, p.z);
    out << buf;
  }
}

CalibrationReport check_calibration(const CameraRig& rig, double depth_m, int stride) {
  rig.validate();
  const RigidTransform back = rig.depth_to_color.inverse();
  CalibrationReport rep;
  for (int v = 0; v < rig.depth.height; v += stride) {
    for (int u = 0; u < rig.depth.width; u += stride) {
      const Point3 pc = transform(deproject(u, v, depth_m, rig.depth, Frame::Depth), rig.depth_to_color);
      const auto px = project(pc, rig.color);
      if (!px) continue;
      const Point3 pd = transform(deproject(px->u, px->v, pc.z, rig.color, Frame::Color), back);
      const auto q = project(pd, rig.depth);
      if (!q) continue;
      rep.max_roundtrip_px = std::max(rep.max_roundtrip_px, std::hypot(q->u - u, q->v - v));
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace eyectl
