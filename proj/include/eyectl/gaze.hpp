#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "eyectl/category_map.hpp"
#include "eyectl/config.hpp"
#include "eyectl/core.hpp"

namespace eyectl {

/// Raw eye-tracker sample: normalized coordinates with the origin at the lower-left corner
/// of the scene video.
struct GazeSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

/// Gaze sample in scene-image pixels (top-left origin).
struct GazePoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

/// The single place where lower-left normalized coordinates become top-left pixels.
/// Coordinates are clamped to [0,1] first.
GazePoint to_pixels(const GazeSample& s, int image_width, int image_height);
std::vector<GazePoint> ingest(std::span<const GazeSample> samples, int image_width, int image_height);

struct Fixation {
  double center_x = 0.0;
  double center_y = 0.0;
  double onset = 0.0;
  double duration = 0.0;
  double dispersion = 0.0;
  double mean_confidence = 0.0;

  double end() const { return onset + duration; }
};

/// Fixations with lower confidence are never used for selection.
inline constexpr double kMinSelectionConfidence = 0.95;

/// Dispersion-threshold identification (I-DT). Dispersion of a window is
/// (max x - min x) + (max y - min y) in pixels; duration is last minus first timestamp.
/// A window that stays inside the threshold is closed once it spans `max_duration_s`, so a
/// continuous dwell yields a fresh fixation at sub-second cadence.
/// Throws EmptyStream on empty input.
std::vector<Fixation> detect_fixations(std::span<const GazePoint> stream, const DwellParams& params,
                                       double max_duration_s = 0.9);

/// Pictogram whose box contains the fixation center; overlapping hits resolve to the
/// nearest box center, then the lowest index. Non-pictogram detections are skipped.
std::optional<Detection> select_pictogram(const Fixation& fix, std::span<const Detection> pictograms);

/// Object (non-pictogram) detection under the fixation, same tie-breaking.
std::optional<Detection> select_object(const Fixation& fix, std::span<const Detection> detections);

struct AwaitingSecondary {
  TaskId task = TaskId::Drink;
  Detection primary;
  int primary_category = -1;
};

struct SelectionState {
  std::variant<std::monostate, AwaitingSecondary> mode;  // monostate == Idle
  double debounce_until = -1.0;
  std::optional<std::pair<TaskId, BoundingBox>> debounce_key;

  bool idle() const { return std::holds_alternative<std::monostate>(mode); }
};

/// Debounce window per (task, box) selection.
inline constexpr double kDebounceSeconds = 1.0;

/// Object category reported for a selected pictogram: the category of the user-scene object
/// carrying it if that category serves the task, otherwise the task's lowest category id.
int object_category_for(const Detection& pictogram, TaskId task, std::span<const Detection> detections,
                        const CategoryMap& map);

/// Advances the gaze-cursor state machine by one fixation.
std::pair<SelectionState, std::optional<FeaturesMessage>> step_selection(SelectionState state, const Fixation& fix,
                                                                         std::span<const Detection> detections,
                                                                         const CategoryMap& map, double now);

/// JSON-lines `{t, x, y, conf}`.
std::vector<GazeSample> load_gaze(const std::filesystem::path& path);
void save_gaze(const std::filesystem::path& path, std::span<const GazeSample> samples);

}  // namespace eyectl
