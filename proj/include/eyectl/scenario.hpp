#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eyectl/category_map.hpp"
#include "eyectl/core.hpp"
#include "eyectl/gaze.hpp"
#include "eyectl/geometry.hpp"
#include "eyectl/image.hpp"
#include "eyectl/transfer.hpp"

namespace eyectl {

/// One timestamped frame. Frames that show the same picture share an entry in Scenario::images.
struct FrameRecord {
  std::int64_t frame = 0;
  double t = 0.0;
  std::size_t image = 0;  // index into Scenario::images
  std::vector<Detection> detections;
  std::optional<std::size_t> depth;  // index into Scenario::depth_images (robot side only)
};

/// Expected result of one scripted selection.
struct TruthEntry {
  int measurement = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::int64_t user_frame = 0;
  std::int64_t robot_frame = 0;
  TaskId task = TaskId::Drink;
  int object_category = -1;              // true class of the gazed object in the user scene
  std::optional<int> target_category;    // empty when no robot-side object is correct
  std::optional<BoundingBox> target_box;  // robot-frame box of the correct object
};

struct StoredImage {
  std::string file;  // path relative to the scenario directory
  GrayImage pixels;
};

struct StoredDepth {
  std::string file;
  DepthImage pixels;
};

struct Scenario {
  std::string name;
  std::string kind;
  std::uint64_t seed = 0;
  int width = 1280;
  int height = 720;
  CategoryMap map = CategoryMap::defaults();
  std::vector<StoredImage> images;
  std::vector<StoredDepth> depth_images;
  std::vector<FrameRecord> user_frames;
  std::vector<FrameRecord> robot_frames;
  std::vector<GazeSample> gaze;
  std::vector<TruthEntry> truth;
  std::optional<CameraRig> rig;

  /// Latest frame with t <= time; nullptr before the first frame.
  const FrameRecord* user_frame_at(double time) const;
  const FrameRecord* robot_frame_at(double time) const;
  SceneView view(const FrameRecord& frame) const;

  /// Throws ScenarioError naming the offending frame: non-monotone timestamps, dangling
  /// image references, detections outside the image, or truth windows without frames.
  void validate() const;
};

/// Writes the directory layout: scenario.json, user/ and robot/ images, gaze.jsonl,
/// detections_user.jsonl, detections_robot.jsonl, truth.jsonl and, with a rig, calib.json
/// plus depth/.
void save_scenario(const Scenario& s, const std::filesystem::path& dir);
/// Throws IoError for unreadable files and ScenarioError for malformed content.
Scenario load_scenario(const std::filesystem::path& dir);

/// Detection sidecar, JSON-lines `{frame, t, category_id, score, x, y, w, h}`.
void save_detections(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);
std::vector<std::pair<std::int64_t, Detection>> load_detections(const std::filesystem::path& path);

}  // namespace eyectl
