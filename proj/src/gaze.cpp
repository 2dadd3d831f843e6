#include "eyectl/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "eyectl/error.hpp"

namespace eyectl {

GazePoint to_pixels(const GazeSample& s, int image_width, int image_height) {
  const double nx = std::clamp(s.x, 0.0, 1.0);
  const double ny = std::clamp(s.y, 0.0, 1.0);
  return {s.t, nx * image_width, (1.0 - ny) * image_height, std::clamp(s.confidence, 0.0, 1.0)};
}

std::vector<GazePoint> ingest(std::span<const GazeSample> samples, int image_width, int image_height) {
  std::vector<GazePoint> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(to_pixels(s, image_width, image_height));
  return out;
}

namespace {

struct Extent {
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const GazePoint& p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  double dispersion() const { return (max_x - min_x) + (max_y - min_y); }
  Extent with(const GazePoint& p) const {
    Extent e = *this;
    e.add(p);
    return e;
  }
};

Fixation make_fixation(std::span<const GazePoint> window, const Extent& extent) {
  Fixation f;
  double sx = 0.0, sy = 0.0, sc = 0.0;
  for (const auto& p : window) {
    sx += p.x;
    sy += p.y;
    sc += p.confidence;
  }
  const double n = static_cast<double>(window.size());
  f.center_x = sx / n;
  f.center_y = sy / n;
  f.mean_confidence = sc / n;
  f.onset = window.front().t;
  f.duration = window.back().t - window.front().t;
  f.dispersion = extent.dispersion();
  return f;
}

template <typename Pred>
std::optional<Detection> nearest_containing(const Fixation& fix, std::span<const Detection> detections, Pred keep) {
  std::optional<Detection> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& d : detections) {
    if (!keep(d) || !d.box.contains(fix.center_x, fix.center_y)) continue;
    const double dx = d.box.center_x() - fix.center_x;
    const double dy = d.box.center_y() - fix.center_y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {  // strict: equal distance keeps the lower index
      best_d2 = d2;
      best = d;
    }
  }
  return best;
}

}  // namespace

std::vector<Fixation> detect_fixations(std::span<const GazePoint> stream, const DwellParams& params,
                                       double max_duration_s) {
  if (stream.empty()) throw EmptyStream("gaze stream has no samples");
  const double min_dur = params.min_duration_ms / 1000.0;
  const double max_dur = std::max(max_duration_s, min_dur);
  const double thr = params.dispersion_px;
  const std::size_t n = stream.size();

  std::vector<Fixation> out;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && stream[j].t - stream[i].t < min_dur) ++j;
    if (j == n) break;
    Extent extent;
    for (std::size_t k = i; k <= j; ++k) extent.add(stream[k]);
    if (extent.dispersion() > thr) {
      ++i;
      continue;
    }
    while (j + 1 < n && stream[j + 1].t - stream[i].t <= max_dur) {
      const Extent grown = extent.with(stream[j + 1]);
      if (grown.dispersion() > thr) break;
      extent = grown;
      ++j;
    }
    out.push_back(make_fixation(stream.subspan(i, j - i + 1), extent));
    i = j + 1;
  }
  return out;
}

std::optional<Detection> select_pictogram(const Fixation& fix, std::span<const Detection> pictograms) {
  return nearest_containing(fix, pictograms, [](const Detection& d) { return is_pictogram_category(d.category_id); });
}

std::optional<Detection> select_object(const Fixation& fix, std::span<const Detection> detections) {
  return nearest_containing(fix, detections, [](const Detection& d) { return !is_pictogram_category(d.category_id); });
}

int object_category_for(const Detection& pictogram, TaskId task, std::span<const Detection> detections,
                        const CategoryMap& map) {
  const auto& allowed = resolve_task(task, map);
  Fixation probe;
  probe.center_x = pictogram.box.center_x();
  probe.center_y = pictogram.box.center_y();
  const auto carrier = nearest_containing(probe, detections, [&](const Detection& d) {
    return !is_pictogram_category(d.category_id) && allowed.count(d.category_id) != 0;
  });
  return carrier ? carrier->category_id : *allowed.begin();
}

std::pair<SelectionState, std::optional<FeaturesMessage>> step_selection(SelectionState state, const Fixation& fix,
                                                                         std::span<const Detection> detections,
                                                                         const CategoryMap& map, double now) {
  if (fix.mean_confidence < kMinSelectionConfidence) return {std::move(state), std::nullopt};

  if (auto* awaiting = std::get_if<AwaitingSecondary>(&state.mode)) {
    const auto& primary_box = awaiting->primary.box;
    // The object carrying the primary pictogram cannot be its own secondary.
    const auto obj = nearest_containing(fix, detections, [&](const Detection& d) {
      return !is_pictogram_category(d.category_id) && !d.box.contains(primary_box.center_x(), primary_box.center_y());
    });
    if (!obj) return {std::move(state), std::nullopt};
    FeaturesMessage msg;
    msg.box = primary_box;
    msg.object_category = awaiting->primary_category;
    msg.task = awaiting->task;
    msg.has_secondary = true;
    msg.secondary_box = obj->box;
    msg.secondary_category = obj->category_id;
    msg.timestamp = now;
    state.mode = std::monostate{};
    return {std::move(state), msg};
  }

  const auto pic = select_pictogram(fix, detections);
  if (!pic) return {std::move(state), std::nullopt};
  const auto task = task_from_category(pic->category_id);
  if (!task || !map.contains(*task)) return {std::move(state), std::nullopt};

  const bool repeated = state.debounce_key && state.debounce_key->first == *task &&
                        iou(state.debounce_key->second, pic->box) >= 0.5 && now < state.debounce_until;
  state.debounce_key = {*task, pic->box};
  state.debounce_until = now + kDebounceSeconds;
  if (repeated) return {std::move(state), std::nullopt};

  const int category = object_category_for(*pic, *task, detections, map);
  if (map.needs_secondary(*task)) {
    state.mode = AwaitingSecondary{*task, *pic, category};
    return {std::move(state), std::nullopt};
  }
  FeaturesMessage msg;
  msg.box = pic->box;
  msg.object_category = category;
  msg.task = *task;
  msg.timestamp = now;
  return {std::move(state), msg};
}

std::vector<GazeSample> load_gaze(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gaze stream " + path.string());
  std::vector<GazeSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("t").get<double>(), j.at("x").get<double>(), j.at("y").get<double>(),
                     j.at("conf").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ScenarioError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_gaze(const std::filesystem::path& path, std::span<const GazeSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write gaze stream " + path.string());
  for (const auto& s : samples) {
    nlohmann::ordered_json j;
    j["t"] = s.t;
    j["x"] = s.x;
    j["y"] = s.y;
    j["conf"] = s.confidence;
    out << j.dump() << '\n';
  }
}

}  // namespace eyectl
