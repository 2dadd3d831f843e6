#include "eyectl/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eyectl/error.hpp"
#include "eyectl/kmeans.hpp"
#include "eyectl/matching.hpp"

namespace eyectl {

std::string_view to_string(Approach a) { return a == Approach::Comparative ? "Comparative" : "WildSearch"; }

std::string_view to_string(NoSendReason r) {
  switch (r) {
    case NoSendReason::None: return "None";
    case NoSendReason::BelowThreshold: return "BelowThreshold";
    case NoSendReason::CategoryMismatch: return "CategoryMismatch";
    case NoSendReason::TooFewForClustering: return "TooFewForClustering";
    case NoSendReason::NoDetections: return "NoDetections";
    case NoSendReason::NoSelection: return "NoSelection";
  }
  return "None";
}

BoundingBox expand_cutout(const BoundingBox& pictogram, int img_w, int img_h, double scale) {
  const double w = pictogram.w * scale;
  const double h = pictogram.h * scale;
  const BoundingBox grown{pictogram.center_x() - 0.5 * w, pictogram.center_y() - 0.5 * h, w, h};
  return grown.clamped(img_w, img_h);
}

GrayImage extract_cutout(const GrayImage& img, const BoundingBox& box) {
  BoundingBox g = BoundingBox{box.x - kCutoutMargin, box.y - kCutoutMargin, box.w + 2.0 * kCutoutMargin,
                              box.h + 2.0 * kCutoutMargin}
                      .clamped(img.width, img.height);
  // Grow a short side about its centre, then slide it back inside the image.
  auto widen = [](double& lo, double& len, double limit) {
    if (len >= kAkazeMinSide) return;
    const double target = std::min<double>(kAkazeMinSide, limit);
    lo = std::clamp(lo - 0.5 * (target - len), 0.0, limit - target);
    len = target;
  };
  widen(g.x, g.w, img.width);
  widen(g.y, g.h, img.height);
  return crop(img, g);
}

std::vector<Detection> object_detections(std::span<const Detection> detections) {
  std::vector<Detection> out;
  for (const auto& d : detections) {
    if (!is_pictogram_category(d.category_id)) out.push_back(d);
  }
  return out;
}

SelectionOutcome comparative_match(const GrayImage& user_cutout, const SceneView& robot_view,
                                   const std::set<int>& candidate_ids, const PipelineConfig& cfg) {
  const auto objects = object_detections(robot_view.detections);
  if (std::none_of(objects.begin(), objects.end(), [&](const Detection& d) { return candidate_ids.count(d.category_id); })) {
    throw NoCandidates("robot view has no detection in the candidate set");
  }
  return comparative_match(detect_features(user_cutout, cfg.detector), robot_view, candidate_ids, cfg);
}

SelectionOutcome comparative_match(const FeatureSet& user_features, const SceneView& robot_view,
                                   const std::set<int>& candidate_ids, const PipelineConfig& cfg) {
  const auto objects = object_detections(robot_view.detections);
  if (std::none_of(objects.begin(), objects.end(), [&](const Detection& d) { return candidate_ids.count(d.category_id); })) {
    throw NoCandidates("robot view has no detection in the candidate set");
  }
  SelectionOutcome out;
  out.approach = Approach::Comparative;
  std::size_t best = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const FeatureSet fs = detect_features(extract_cutout(robot_view.image, objects[i].box), cfg.detector);
    const auto matches = match_and_filter(user_features, fs, cfg);
    double mean = std::numeric_limits<double>::infinity();
    if (!matches.empty()) {
      double sum = 0.0;
      for (const auto& m : matches) sum += m.distance;
      mean = sum / static_cast<double>(matches.size());
    }
    out.candidate_counts.push_back(matches.size());
    out.total_matches += matches.size();
    const bool better = i == 0 || matches.size() > out.candidate_counts[best] ||
                        (matches.size() == out.candidate_counts[best] && mean < best_mean);
    if (better) {
      best = i;
      best_mean = mean;
    }
  }
  out.target = objects[best];
  out.match_count = out.candidate_counts[best];
  if (out.match_count < static_cast<std::size_t>(cfg.min_matches)) {
    out.reason = NoSendReason::BelowThreshold;
  } else if (!candidate_ids.count(objects[best].category_id)) {
    out.reason = NoSendReason::CategoryMismatch;
  } else {
    out.sent = true;
  }
  return out;
}

SelectionOutcome wild_search(const GrayImage& user_cutout, const SceneView& robot_view, const PipelineConfig& cfg,
                             std::uint64_t seed) {
  if (object_detections(robot_view.detections).empty()) throw NoDetections("robot view has no object detections");
  return wild_search(detect_features(user_cutout, cfg.detector), robot_view, cfg, seed);
}

SelectionOutcome wild_search(const FeatureSet& user_features, const SceneView& robot_view, const PipelineConfig& cfg,
                             std::uint64_t seed) {
  const auto objects = object_detections(robot_view.detections);
  if (objects.empty()) throw NoDetections("robot view has no object detections");
  SelectionOutcome out;
  out.approach = Approach::WildSearch;
  out.cluster_sizes = std::vector<std::size_t>{};

  const FeatureSet scene = detect_features(robot_view.image, cfg.detector);
  const auto matches = match_and_filter(user_features, scene, cfg);
  out.total_matches = matches.size();
  const int k = static_cast<int>(objects.size()) + 1;
  if (matches.size() < static_cast<std::size_t>(k)) {
    out.reason = NoSendReason::TooFewForClustering;
    return out;
  }
  std::vector<Point2> pts;
  pts.reserve(matches.size());
  for (const auto& m : matches) pts.push_back({scene.keypoints[m.train_idx].x, scene.keypoints[m.train_idx].y});
  const KMeansResult km = kmeans(pts, k, seed);
  out.cluster_sizes = km.sizes;

  std::size_t largest = 0;
  for (std::size_t c = 1; c < km.sizes.size(); ++c) {
    const auto& a = km.centroids[c];
    const auto& b = km.centroids[largest];
    if (km.sizes[c] > km.sizes[largest] ||
        (km.sizes[c] == km.sizes[largest] && (a.x < b.x || (a.x == b.x && a.y < b.y)))) {
      largest = c;
    }
  }
  const Point2 centre = km.centroids[largest];
  std::size_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const double d = std::hypot(objects[i].box.center_x() - centre.x, objects[i].box.center_y() - centre.y);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  out.target = objects[nearest];
  out.match_count = km.sizes[largest];
  out.sent = out.match_count >= static_cast<std::size_t>(cfg.min_matches);
  if (!out.sent) out.reason = NoSendReason::BelowThreshold;
  return out;
}

std::set<int> candidate_categories(const SceneView& user_view, const Detection& pictogram, TaskId task,
                                   const CategoryMap& map) {
  const std::set<int>& allowed = resolve_task(task, map);
  std::set<int> narrowed;
  for (const auto& d : object_detections(user_view.detections)) {
    if (d.box.contains(pictogram.box.center_x(), pictogram.box.center_y()) && allowed.count(d.category_id)) {
      narrowed.insert(d.category_id);
    }
  }
  return narrowed.empty() ? allowed : narrowed;
}

SelectionOutcome fallback_select(const SceneView& user_view, const Detection& selected_pictogram, TaskId task,
                                 const SceneView& robot_view, const CategoryMap& map, const PipelineConfig& cfg) {
  const std::set<int> candidates = candidate_categories(user_view, selected_pictogram, task, map);
  const BoundingBox box = expand_cutout(selected_pictogram.box, user_view.image.width, user_view.image.height,
                                        cfg.cutout_scale);
  const FeatureSet user_features = detect_features(extract_cutout(user_view.image, box), cfg.detector);
  const auto objects = object_detections(robot_view.detections);
  const bool comparative =
      std::any_of(objects.begin(), objects.end(), [&](const Detection& d) { return candidates.count(d.category_id); });
  try {
    if (comparative) return comparative_match(user_features, robot_view, candidates, cfg);
    return wild_search(user_features, robot_view, cfg, cfg.seed);
  } catch (const NoDetections&) {
    SelectionOutcome out;
    out.approach = Approach::WildSearch;
    out.cluster_sizes = std::vector<std::size_t>{};
    out.reason = NoSendReason::NoDetections;
    return out;
  }
}

nlohmann::ordered_json outcome_json(std::int64_t frame, std::optional<TaskId> task, const SelectionOutcome& o,
                                    double elapsed_ms) {
  nlohmann::ordered_json j;
  j["frame"] = frame;
  j["task"] = task ? nlohmann::ordered_json(std::string(task_label(*task))) : nlohmann::ordered_json(nullptr);
  j["approach"] = std::string(to_string(o.approach));
  j["sent"] = o.sent;
  j["reason"] = std::string(to_string(o.reason));
  j["match_count"] = o.match_count;
  j["total_matches"] = o.total_matches;
  if (o.cluster_sizes) {
    j["cluster_sizes"] = *o.cluster_sizes;
  } else {
    j["cluster_sizes"] = nullptr;
  }
  if (o.target) {
    j["target_category"] = o.target->category_id;
    j["target_box"] = {o.target->box.x, o.target->box.y, o.target->box.w, o.target->box.h};
  } else {
    j["target_category"] = nullptr;
    j["target_box"] = nullptr;
  }
  j["elapsed_ms"] = elapsed_ms;
  return j;
}

}  // namespace eyectl
