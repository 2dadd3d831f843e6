#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eyectl {

/// Axis-aligned pixel box, top-left origin.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0 && x >= 0.0 && y >= 0.0; }

  /// Inclusive on all four edges.
  bool contains(double px, double py) const { return px >= x && px <= x + w && py >= y && py <= y + h; }

  /// Intersection with [0,width]x[0,height]; empty boxes come back with w or h == 0.
  BoundingBox clamped(double width, double height) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// A detected region from either the pictogram model or the object model.
struct Detection {
  BoundingBox box;
  int category_id = -1;
  double score = 0.0;
  std::int64_t frame_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class TaskId : std::uint8_t {
  Drink = 0,
  FillCup = 1,
  Eat = 2,
  Scratch = 3,
  SwitchLightSwitch = 4,
  Brush = 5,
  PickObject = 6,
  PlaceObject = 7,
};

inline constexpr std::array<TaskId, 8> kAllTasks = {
    TaskId::Drink,   TaskId::FillCup,           TaskId::Eat,         TaskId::Scratch,
    TaskId::SwitchLightSwitch, TaskId::Brush, TaskId::PickObject, TaskId::PlaceObject};

/// Pictogram detections carry category ids in [kTaskCategoryBase, kTaskCategoryBase + 8);
/// object categories use the MS COCO ids below that range.
inline constexpr int kTaskCategoryBase = 1000;

std::string_view task_label(TaskId task);
std::optional<TaskId> task_from_label(std::string_view label);
int task_category(TaskId task);
std::optional<TaskId> task_from_category(int category_id);
inline bool is_pictogram_category(int category_id) { return task_from_category(category_id).has_value(); }

/// Common object categories (MS COCO ids) plus a small assistive range for objects COCO lacks.
namespace category {
inline constexpr int kSuitcase = 33;
inline constexpr int kBottle = 44;
inline constexpr int kWineGlass = 46;
inline constexpr int kCup = 47;
inline constexpr int kFork = 48;
inline constexpr int kKnife = 49;
inline constexpr int kSpoon = 50;
inline constexpr int kBowl = 51;
inline constexpr int kToothbrush = 90;
inline constexpr int kBackScratcher = 2000;
inline constexpr int kLightSwitch = 2001;
}  // namespace category

/// Human-readable name for an object or pictogram category; "class_<id>" when unknown.
std::string category_name(int category_id);

/// Payload handed from the gaze side to the robot side.
struct FeaturesMessage {
  BoundingBox box;
  int object_category = -1;
  TaskId task = TaskId::Drink;
  bool has_secondary = false;
  std::optional<BoundingBox> secondary_box;
  std::optional<int> secondary_category;
  double timestamp = 0.0;
};

}  // namespace eyectl
