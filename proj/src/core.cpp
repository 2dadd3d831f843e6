#include "eyectl/core.hpp"

#include <algorithm>
#include <map>

namespace eyectl {

BoundingBox BoundingBox::clamped(double width, double height) const {
  const double x0 = std::clamp(x, 0.0, width);
  const double y0 = std::clamp(y, 0.0, height);
  const double x1 = std::clamp(x + w, 0.0, width);
  const double y1 = std::clamp(y + h, 0.0, height);
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

constexpr std::array<std::string_view, 8> kTaskLabels = {
    "Drink", "FillCup", "Eat", "Scratch", "SwitchLightSwitch", "Brush", "PickObject", "PlaceObject"};

}  // namespace

std::string_view task_label(TaskId task) {
  const auto idx = static_cast<std::size_t>(task);
  return idx < kTaskLabels.size() ? kTaskLabels[idx] : std::string_view("Unknown");
}

std::optional<TaskId> task_from_label(std::string_view label) {
  for (std::size_t i = 0; i < kTaskLabels.size(); ++i) {
    if (kTaskLabels[i] == label) return static_cast<TaskId>(i);
  }
  return std::nullopt;
}

int task_category(TaskId task) { return kTaskCategoryBase + static_cast<int>(task); }

std::optional<TaskId> task_from_category(int category_id) {
  const int idx = category_id - kTaskCategoryBase;
  if (idx < 0 || idx >= static_cast<int>(kAllTasks.size())) return std::nullopt;
  return static_cast<TaskId>(idx);
}

std::string category_name(int category_id) {
  static const std::map<int, std::string> names = {
      {1, "person"},       {33, "suitcase"},      {44, "bottle"},         {46, "wine glass"},
      {47, "cup"},         {48, "fork"},          {49, "knife"},          {50, "spoon"},
      {51, "bowl"},        {90, "toothbrush"},    {2000, "back scratcher"}, {2001, "light switch"}};
  if (auto task = task_from_category(category_id)) return "pictogram:" + std::string(task_label(*task));
  if (auto it = names.find(category_id); it != names.end()) return it->second;
  return "class_" + std::to_string(category_id);
}

}  // namespace eyectl
