#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eyectl/category_map.hpp"
#include "eyectl/config.hpp"
#include "eyectl/core.hpp"
#include "eyectl/features.hpp"
#include "eyectl/image.hpp"

namespace eyectl {

/// One camera frame with the detections reported for it.
struct SceneView {
  GrayImage image;
  std::vector<Detection> detections;
  std::int64_t frame_id = 0;
  double t = 0.0;
};

enum class Approach { Comparative, WildSearch };

enum class NoSendReason {
  None,
  BelowThreshold,
  CategoryMismatch,
  TooFewForClustering,
  NoDetections,
  NoSelection,  // gaze produced no message for this measurement
};

std::string_view to_string(Approach a);
std::string_view to_string(NoSendReason r);

struct SelectionOutcome {
  std::optional<Detection> target;
  Approach approach = Approach::Comparative;
  /// Comparative: filtered matches of the winning cutout. WildSearch: size of the largest cluster.
  std::size_t match_count = 0;
  /// Filtered matches before clustering (WildSearch) or summed over cutouts (Comparative).
  std::size_t total_matches = 0;
  std::optional<std::vector<std::size_t>> cluster_sizes;
  /// Comparative only: filtered match count per compared detection, in detection order.
  std::vector<std::size_t> candidate_counts;
  bool sent = false;
  NoSendReason reason = NoSendReason::None;
};

/// Context added around every cutout so features near the box edge keep their support.
inline constexpr int kCutoutMargin = 32;

/// Same centre, both sides multiplied by `scale`, clamped to the image.
BoundingBox expand_cutout(const BoundingBox& pictogram, int img_w, int img_h, double scale);

/// Crop of `box` grown by kCutoutMargin on every side and to at least kAkazeMinSide pixels
/// per side where the image allows it.
GrayImage extract_cutout(const GrayImage& img, const BoundingBox& box);

/// Object detections only (pictogram categories removed), keeping their original order.
std::vector<Detection> object_detections(std::span<const Detection> detections);

/// Matches the user cutout against a cutout of every robot-side object detection. The winner
/// has the most filtered matches (ties: smaller mean distance, then lower index). Throws
/// NoCandidates when no robot detection carries a candidate category.
SelectionOutcome comparative_match(const GrayImage& user_cutout, const SceneView& robot_view,
                                   const std::set<int>& candidate_ids, const PipelineConfig& cfg);
SelectionOutcome comparative_match(const FeatureSet& user_features, const SceneView& robot_view,
                                   const std::set<int>& candidate_ids, const PipelineConfig& cfg);

/// Matches the user cutout against the full robot image, clusters matched robot keypoints with
/// k = detections + 1 and targets the detection whose centre is nearest the largest cluster.
/// Throws NoDetections when the robot view has no object detection.
SelectionOutcome wild_search(const GrayImage& user_cutout, const SceneView& robot_view, const PipelineConfig& cfg,
                             std::uint64_t seed);
SelectionOutcome wild_search(const FeatureSet& user_features, const SceneView& robot_view, const PipelineConfig& cfg,
                             std::uint64_t seed);

/// Categories allowed for the task, narrowed to the categories of user-side objects that carry
/// the pictogram. Falls back to the full task set when the narrowing is empty.
std::set<int> candidate_categories(const SceneView& user_view, const Detection& pictogram, TaskId task,
                                   const CategoryMap& map);

/// Comparative path when any robot detection carries a candidate category, wild search
/// otherwise. Sub-operation errors come back as sent=false with a reason.
SelectionOutcome fallback_select(const SceneView& user_view, const Detection& selected_pictogram, TaskId task,
                                 const SceneView& robot_view, const CategoryMap& map, const PipelineConfig& cfg);

/// One outcome-log record: `{frame, task, approach, sent, reason, match_count, target_category,
/// target_box, elapsed_ms}` plus the cluster sizes and total match count.
nlohmann::ordered_json outcome_json(std::int64_t frame, std::optional<TaskId> task, const SelectionOutcome& outcome,
                                    double elapsed_ms);

}  // namespace eyectl
