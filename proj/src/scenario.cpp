#include "eyectl/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "eyectl/error.hpp"

namespace eyectl {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const FrameRecord* frame_at(const std::vector<FrameRecord>& frames, double time) {
  auto it = std::upper_bound(frames.begin(), frames.end(), time, [](double t, const FrameRecord& f) { return t < f.t; });
  if (it == frames.begin()) return nullptr;
  return &*std::prev(it);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

ojson box_json(const BoundingBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

BoundingBox box_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ScenarioError("box must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ojson frames_json(const std::vector<FrameRecord>& frames, const std::vector<StoredImage>& images,
                  const std::vector<StoredDepth>& depth) {
  ojson arr = ojson::array();
  for (const auto& f : frames) {
    ojson j;
    j["frame"] = f.frame;
    j["t"] = f.t;
    j["image"] = images.at(f.image).file;
    if (f.depth) j["depth"] = depth.at(*f.depth).file;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

const FrameRecord* Scenario::user_frame_at(double time) const { return frame_at(user_frames, time); }
const FrameRecord* Scenario::robot_frame_at(double time) const { return frame_at(robot_frames, time); }

SceneView Scenario::view(const FrameRecord& frame) const {
  return SceneView{images.at(frame.image).pixels, frame.detections, frame.frame, frame.t};
}

void Scenario::validate() const {
  for (const auto* frames : {&user_frames, &robot_frames}) {
    for (std::size_t i = 0; i < frames->size(); ++i) {
      const auto& f = (*frames)[i];
      if (i > 0 && f.t < (*frames)[i - 1].t) throw ScenarioError("frame timestamps are not monotone", f.frame);
      if (f.image >= images.size()) throw ScenarioError("frame references a missing image", f.frame);
      const auto& img = images[f.image].pixels;
      if (img.width != width || img.height != height) throw ScenarioError("frame image has the wrong size", f.frame);
      for (const auto& d : f.detections) {
        if (d.box.x < 0 || d.box.y < 0 || d.box.right() > width + 1e-6 || d.box.bottom() > height + 1e-6 || d.box.w <= 0 ||
            d.box.h <= 0) {
          throw ScenarioError("detection box outside the image", f.frame);
        }
      }
      if (f.depth && *f.depth >= depth_images.size()) throw ScenarioError("frame references a missing depth image", f.frame);
    }
  }
  for (std::size_t i = 1; i < gaze.size(); ++i) {
    if (gaze[i].t < gaze[i - 1].t) throw ScenarioError("gaze timestamps are not monotone");
  }
  for (const auto& t : truth) {
    if (!user_frame_at(t.t_start) || !robot_frame_at(t.t_start)) {
      throw ScenarioError("truth window " + std::to_string(t.measurement) + " starts before the first frame");
    }
  }
}

void save_detections(const fs::path& path, const std::vector<FrameRecord>& frames) {
  auto out = open_out(path);
  for (const auto& f : frames) {
    for (const auto& d : f.detections) {
      ojson j;
      j["frame"] = f.frame;
      j["t"] = f.t;
      j["category_id"] = d.category_id;
      j["score"] = d.score;
      j["x"] = d.box.x;
      j["y"] = d.box.y;
      j["w"] = d.box.w;
      j["h"] = d.box.h;
      out << j.dump() << '\n';
    }
  }
}

std::vector<std::pair<std::int64_t, Detection>> load_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::pair<std::int64_t, Detection>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.frame_id = j.at("frame").get<std::int64_t>();
      d.category_id = j.at("category_id").get<int>();
      d.score = j.at("score").get<double>();
      d.box = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
      out.emplace_back(d.frame_id, d);
    } catch (const nlohmann::json::exception& e) {
      throw ScenarioError(path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_scenario(const Scenario& s, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& img : s.images) {
    fs::create_directories((dir / img.file).parent_path(), ec);
    if (ec) throw IoError("cannot create directory for " + img.file);
    save_image(dir / img.file, img.pixels);
  }
  for (const auto& d : s.depth_images) {
    fs::create_directories((dir / d.file).parent_path(), ec);
    if (ec) throw IoError("cannot create directory for " + d.file);
    save_image(dir / d.file, d.pixels);
  }

  ojson m;
  m["name"] = s.name;
  m["kind"] = s.kind;
  m["seed"] = s.seed;
  m["width"] = s.width;
  m["height"] = s.height;
  m["category_map"] = s.map.serialize();
  m["user_frames"] = frames_json(s.user_frames, s.images, s.depth_images);
  m["robot_frames"] = frames_json(s.robot_frames, s.images, s.depth_images);
  if (s.rig) {
    m["calib"] = "calib.json";
    save_calibration(dir / "calib.json", *s.rig);
  }
  open_out(dir / "scenario.json") << m.dump(2) << '\n';

  save_gaze(dir / "gaze.jsonl", s.gaze);
  save_detections(dir / "detections_user.jsonl", s.user_frames);
  save_detections(dir / "detections_robot.jsonl", s.robot_frames);

  auto out = open_out(dir / "truth.jsonl");
  for (const auto& t : s.truth) {
    ojson j;
    j["measurement"] = t.measurement;
    j["t_start"] = t.t_start;
    j["t_end"] = t.t_end;
    j["user_frame"] = t.user_frame;
    j["robot_frame"] = t.robot_frame;
    j["task"] = std::string(task_label(t.task));
    j["object_category"] = t.object_category;
    j["target_category"] = t.target_category ? ojson(*t.target_category) : ojson(nullptr);
    j["target_box"] = t.target_box ? box_json(*t.target_box) : ojson(nullptr);
    out << j.dump() << '\n';
  }
}

Scenario load_scenario(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("scenario directory not found: " + dir.string());
  Scenario s;
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_text(dir / "scenario.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario.json: ") + e.what());
  }
  try {
    s.name = m.value("name", dir.filename().string());
    s.kind = m.value("kind", "");
    s.seed = m.value("seed", std::uint64_t{0});
    s.width = m.at("width").get<int>();
    s.height = m.at("height").get<int>();
    if (m.contains("category_map")) s.map = CategoryMap::parse(m.at("category_map").get<std::string>());
    if (m.contains("calib")) s.rig = load_calibration(dir / m.at("calib").get<std::string>());

    std::map<std::string, std::size_t> image_index, depth_index;
    auto load_frames = [&](const nlohmann::json& arr, std::vector<FrameRecord>& frames) {
      for (const auto& j : arr) {
        FrameRecord f;
        f.frame = j.at("frame").get<std::int64_t>();
        f.t = j.at("t").get<double>();
        const auto file = j.at("image").get<std::string>();
        auto [it, fresh] = image_index.emplace(file, s.images.size());
        if (fresh) s.images.push_back({file, load_gray(dir / file)});
        f.image = it->second;
        if (j.contains("depth")) {
          const auto dfile = j.at("depth").get<std::string>();
          auto [dit, dfresh] = depth_index.emplace(dfile, s.depth_images.size());
          if (dfresh) s.depth_images.push_back({dfile, load_gray16(dir / dfile)});
          f.depth = dit->second;
        }
        frames.push_back(std::move(f));
      }
    };
    load_frames(m.at("user_frames"), s.user_frames);
    load_frames(m.at("robot_frames"), s.robot_frames);
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario.json: ") + e.what());
  } catch (const ConfigError& e) {
    throw ScenarioError(std::string("scenario.json category_map: ") + e.what());
  }

  auto attach = [](std::vector<FrameRecord>& frames, const std::vector<std::pair<std::int64_t, Detection>>& dets) {
    std::map<std::int64_t, FrameRecord*> by_id;
    for (auto& f : frames) by_id[f.frame] = &f;
    for (const auto& [frame, d] : dets) {
      auto it = by_id.find(frame);
      if (it == by_id.end()) throw ScenarioError("detection for unknown frame", frame);
      it->second->detections.push_back(d);
    }
  };
  attach(s.user_frames, load_detections(dir / "detections_user.jsonl"));
  attach(s.robot_frames, load_detections(dir / "detections_robot.jsonl"));
  s.gaze = load_gaze(dir / "gaze.jsonl");

  std::ifstream in(dir / "truth.jsonl");
  if (!in) throw IoError("cannot read " + (dir / "truth.jsonl").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TruthEntry t;
      t.measurement = j.at("measurement").get<int>();
      t.t_start = j.at("t_start").get<double>();
      t.t_end = j.at("t_end").get<double>();
      t.user_frame = j.at("user_frame").get<std::int64_t>();
      t.robot_frame = j.at("robot_frame").get<std::int64_t>();
      const auto task = task_from_label(j.at("task").get<std::string>());
      if (!task) throw ScenarioError("truth.jsonl: unknown task " + j.at("task").get<std::string>());
      t.task = *task;
      t.object_category = j.at("object_category").get<int>();
      if (!j.at("target_category").is_null()) t.target_category = j.at("target_category").get<int>();
      if (!j.at("target_box").is_null()) t.target_box = box_from(j.at("target_box"));
      s.truth.push_back(t);
    } catch (const nlohmann::json::exception& e) {
      throw ScenarioError(std::string("truth.jsonl: ") + e.what());
    }
  }
  s.validate();
  return s;
}

}  // namespace eyectl
