#include "eyectl/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "eyectl/error.hpp"

namespace eyectl {

namespace fs = std::filesystem;

std::string_view to_string(SuCase kind) {
  switch (kind) {
    case SuCase::Case1: return "case1";
    case SuCase::Case2: return "case2";
    case SuCase::Case3Joint: return "case3-joint";
    case SuCase::Case3Disjoint: return "case3-disjoint";
  }
  return "case1";
}

SuCase parse_su_case(std::string_view text) {
  for (SuCase k : {SuCase::Case1, SuCase::Case2, SuCase::Case3Joint, SuCase::Case3Disjoint}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("kind", 0, "unknown scenario kind '" + std::string(text) + "'");
}

namespace {

/// Draws from the raw engine only, so every standard library produces the same scenes.
struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int index(int n) { return static_cast<int>(engine() % static_cast<std::uint64_t>(n)); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Canvas {
  int w = 0, h = 0;
  std::vector<float> v;
  Canvas(int width, int height, float fill = 0.f) : w(width), h(height), v(static_cast<std::size_t>(width) * height, fill) {}
  float& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  float sample(double x, double y) const {
    x = std::clamp(x, 0.0, w - 1.0);
    y = std::clamp(y, 0.0, h - 1.0);
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
    const float fx = static_cast<float>(x - x0), fy = static_cast<float>(y - y0);
    return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
  }
};

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// ---- pictograms --------------------------------------------------------------------------

bool in_triangle(double u, double v, std::array<double, 6> t) {
  auto side = [](double px, double py, double ax, double ay, double bx, double by) {
    return (px - bx) * (ay - by) - (ax - bx) * (py - by);
  };
  const double d1 = side(u, v, t[0], t[1], t[2], t[3]);
  const double d2 = side(u, v, t[2], t[3], t[4], t[5]);
  const double d3 = side(u, v, t[4], t[5], t[0], t[1]);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

bool in_rect(double u, double v, double u0, double v0, double u1, double v1) { return u >= u0 && u <= u1 && v >= v0 && v <= v1; }

/// True where the design is black, in unit coordinates with v pointing down.
bool glyph_ink(TaskId task, double u, double v) {
  if (u < 0.06 || u > 0.94 || v < 0.06 || v > 0.94) return true;  // frame
  const double r = std::hypot(u - 0.5, v - 0.5);
  switch (task) {
    case TaskId::Drink:
      return (r > 0.22 && r < 0.34) || r < 0.1;
    case TaskId::FillCup:
      return in_triangle(u, v, {0.2, 0.2, 0.8, 0.2, 0.5, 0.56}) || in_rect(u, v, 0.25, 0.68, 0.75, 0.8);
    case TaskId::Eat:
      return in_rect(u, v, 0.25, 0.2, 0.33, 0.55) || in_rect(u, v, 0.46, 0.2, 0.54, 0.82) ||
             in_rect(u, v, 0.67, 0.2, 0.75, 0.55) || in_rect(u, v, 0.25, 0.5, 0.75, 0.58);
    case TaskId::Scratch: {
      if (u < 0.15 || u > 0.85) return false;
      const double phase = std::fmod((u - 0.15) / 0.3, 1.0);
      const double zig = 0.15 * (phase < 0.5 ? 4 * phase - 1 : 3 - 4 * phase);
      return std::fabs(v - 0.33 - zig) < 0.06 || std::fabs(v - 0.67 + zig) < 0.06;
    }
    case TaskId::SwitchLightSwitch:
      return (in_rect(u, v, 0.25, 0.25, 0.75, 0.75) && !in_rect(u, v, 0.32, 0.32, 0.68, 0.68)) ||
             in_rect(u, v, 0.44, 0.36, 0.56, 0.52);
    case TaskId::Brush: {
      if (in_rect(u, v, 0.15, 0.6, 0.85, 0.68)) return true;
      for (int k = 0; k < 6; ++k) {
        const double c = 0.2 + 0.08 * k;
        if (std::fabs(u - c) < 0.0175 && v >= 0.3 && v <= 0.6) return true;
      }
      return false;
    }
    case TaskId::PickObject:
      return in_rect(u, v, 0.44, 0.4, 0.56, 0.82) || in_triangle(u, v, {0.5, 0.15, 0.25, 0.42, 0.75, 0.42});
    case TaskId::PlaceObject:
      return (in_rect(u, v, 0.2, 0.2, 0.8, 0.72) && (std::fabs(u - (v + 0.04)) < 0.07 || std::fabs(u + v - 0.96) < 0.07)) ||
             in_rect(u, v, 0.2, 0.8, 0.8, 0.86);
  }
  return false;
}

// ---- objects and scenes ------------------------------------------------------------------

struct ObjectSpec {
  int category = category::kCup;
  std::uint64_t identity = 0;
  double w = 0, h = 0;
  std::optional<TaskId> glyph;
  int reported_category = -1;  // robot-side detector label
};

struct PlacedObject {
  ObjectSpec spec;
  BoundingBox box;                    // world coordinates
  std::optional<BoundingBox> glyph_box;
};

constexpr int kGlyphSize = 80;
constexpr int kWorldW = 1600, kWorldH = 960;

std::pair<double, double> object_size(int category) {
  switch (category) {
    case category::kCup: return {220, 250};
    case category::kFork: return {130, 360};
    default: return {170, 380};
  }
}

/// Smooth low-contrast table surface.
Canvas background(std::uint64_t seed) {
  Canvas c(kWorldW, kWorldH);
  Rng rng(seed);
  auto layer = [&](int step, float amp) {
    const int gw = kWorldW / step + 2, gh = kWorldH / step + 2;
    std::vector<float> g(static_cast<std::size_t>(gw) * gh);
    for (auto& x : g) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    for (int y = 0; y < kWorldH; ++y) {
      for (int x = 0; x < kWorldW; ++x) {
        const double fx = static_cast<double>(x) / step, fy = static_cast<double>(y) / step;
        const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
        const double ax = fx - ix, ay = fy - iy;
        auto G = [&](int i, int j) { return g[static_cast<std::size_t>(j) * gw + i]; };
        const double val = (1 - ay) * ((1 - ax) * G(ix, iy) + ax * G(ix + 1, iy)) + ay * ((1 - ax) * G(ix, iy + 1) + ax * G(ix + 1, iy + 1));
        c.at(x, y) += static_cast<float>(amp * val);
      }
    }
  };
  for (int y = 0; y < kWorldH; ++y)
    for (int x = 0; x < kWorldW; ++x) c.at(x, y) = static_cast<float>(140.0 + 25.0 * y / kWorldH);
  layer(64, 12.f);
  layer(16, 3.f);
  return c;
}

/// Identity-specific surface pattern painted into `box` of the canvas.
void paint_object(Canvas& c, const PlacedObject& o) {
  Rng rng(mix(o.spec.identity, 0x0b7ec7ULL));
  const int x0 = static_cast<int>(o.box.x), y0 = static_cast<int>(o.box.y);
  const int w = static_cast<int>(o.box.w), h = static_cast<int>(o.box.h);
  const double base = rng.uniform(95.0, 175.0);
  std::vector<float> tex(static_cast<std::size_t>(w) * h, static_cast<float>(base));
  auto T = [&](int x, int y) -> float& { return tex[static_cast<std::size_t>(y) * w + x]; };
  // Household surfaces are sparsely textured; dense high-contrast patterns make
  // unrelated objects share enough corners to pass the ratio test.
  constexpr int kPrims = 5;
  constexpr double kContrast = 0.5;
  for (int k = 0; k < kPrims; ++k) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const float value = static_cast<float>(std::clamp(base + sign * kContrast * rng.uniform(55.0, 110.0), 10.0, 245.0));
    const int type = rng.index(3);
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const double rx = rng.uniform(6, std::max(8.0, w / 3.5)), ry = rng.uniform(6, std::max(8.0, h / 5.0));
    const double ang = rng.uniform(0, std::numbers::pi);
    const double ca = std::cos(ang), sa = std::sin(ang);
    const double period = rng.uniform(10, 22);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double u = ca * dx + sa * dy, v = -sa * dx + ca * dy;
        bool ink = false;
        if (type == 0) ink = (u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1.0;
        if (type == 1) ink = std::fabs(u) <= rx && std::fabs(v) <= ry * 0.6;
        if (type == 2) ink = std::fabs(u) <= rx && std::fabs(v) <= ry && std::fmod(std::fabs(u), period) < period * 0.45;
        if (ink) T(x, y) = value;
      }
    }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (x0 + x >= 0 && x0 + x < c.w && y0 + y >= 0 && y0 + y < c.h) c.at(x0 + x, y0 + y) = T(x, y);
  if (o.spec.glyph && o.glyph_box) {
    const GrayImage g = draw_glyph(*o.spec.glyph, kGlyphSize);
    const int gx = static_cast<int>(o.glyph_box->x), gy = static_cast<int>(o.glyph_box->y);
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) c.at(gx + x, gy + y) = g.at(x, y);
  }
}

struct World {
  Canvas canvas{kWorldW, kWorldH};
  std::vector<PlacedObject> objects;
};

World compose(std::uint64_t bg_seed, const std::vector<ObjectSpec>& specs, Rng& layout) {
  static constexpr std::array<double, 3> kSlotX = {450, 800, 1120};
  static constexpr std::array<double, 3> kSlotTop = {270, 250, 260};
  World world;
  world.canvas = background(bg_seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    PlacedObject o;
    o.spec = specs[i];
    const double cx = kSlotX[i % 3] + layout.uniform(-25, 25);
    const double top = kSlotTop[i % 3] + layout.uniform(-15, 15);
    o.box = {std::round(cx - specs[i].w / 2), std::round(top), specs[i].w, specs[i].h};
    if (specs[i].glyph) {
      o.glyph_box = BoundingBox{std::round(o.box.center_x() - kGlyphSize / 2.0), std::round(o.box.y + 0.28 * o.box.h - kGlyphSize / 2.0),
                                static_cast<double>(kGlyphSize), static_cast<double>(kGlyphSize)};
    }
    paint_object(world.canvas, o);
    world.objects.push_back(o);
  }
  return world;
}

/// Maps world pixels into a camera: camera = (world - origin) * scale, with a gain/offset and
/// sensor noise applied to the intensities.
struct ViewParams {
  double ox = 0, oy = 0, scale = 1.0, gain = 1.0, offset = 0.0, noise = 1.5;
};

BoundingBox to_view(const BoundingBox& b, const ViewParams& p) {
  return {(b.x - p.ox) * p.scale, (b.y - p.oy) * p.scale, b.w * p.scale, b.h * p.scale};
}

GrayImage render_view(const Canvas& world, const ViewParams& p, int width, int height, Rng& rng) {
  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double v = world.sample(p.ox + x / p.scale, p.oy + y / p.scale);
      img.at(x, y) = to_byte(p.gain * v + p.offset + p.noise * rng.normal());
    }
  }
  return img;
}

/// Detector output for one view: boxes jittered by a couple of pixels and clipped to the image.
std::vector<Detection> detect_in_view(const World& world, const ViewParams& p, int width, int height, bool robot_side,
                                      bool report_glyphs, std::int64_t frame, Rng& rng) {
  std::vector<Detection> out;
  auto push = [&](BoundingBox b, int category, double score) {
    b = {b.x + rng.uniform(-2, 2), b.y + rng.uniform(-2, 2), b.w + rng.uniform(-2, 2), b.h + rng.uniform(-2, 2)};
    b = b.clamped(width, height);
    if (b.w < 10 || b.h < 10) return;
    out.push_back({b, category, score, frame});
  };
  for (const auto& o : world.objects) {
    const int cat = robot_side && o.spec.reported_category >= 0 ? o.spec.reported_category : o.spec.category;
    push(to_view(o.box, p), cat, 0.8 + 0.15 * rng.uniform());
  }
  if (report_glyphs) {
    for (const auto& o : world.objects) {
      if (o.spec.glyph && o.glyph_box) push(to_view(*o.glyph_box, p), task_category(*o.spec.glyph), 0.85 + 0.1 * rng.uniform());
    }
  }
  return out;
}

constexpr int kWidth = 1280, kHeight = 720;
constexpr int kVariants = 4;

CameraRig make_rig() {
  CameraRig rig;
  rig.color = {920.0, 920.0, 640.0, 360.0, kWidth, kHeight};
  rig.depth = {460.0, 460.0, 320.0, 180.0, kWidth / 2, kHeight / 2};
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.5 * std::numbers::pi / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  rig.depth_to_color = RigidTransform(R, Eigen::Vector3d(0.015, 0.0, 0.0), Frame::Depth, Frame::Color);
  rig.depth_scale = 0.001;
  return rig;
}

/// Objects stand 0.75 m from the camera in front of a table plane at 0.9 m; a sparse lattice
/// of pixels has no return.
DepthImage render_depth(const CameraRig& rig, const std::vector<BoundingBox>& color_boxes) {
  DepthImage d(rig.depth.width, rig.depth.height);
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if ((u * 7 + v * 13) % 101 == 0) continue;
      const Point3 near = transform(deproject(u, v, 0.75, rig.depth, Frame::Depth), rig.depth_to_color);
      const auto px = project(near, rig.color);
      bool on_object = false;
      if (px) {
        for (const auto& b : color_boxes) on_object = on_object || in_box(px->u, px->v, b);
      }
      d.at(u, v) = on_object ? 750 : 900;
    }
  }
  return d;
}

std::vector<ObjectSpec> table_objects(std::uint64_t seed, std::array<std::optional<TaskId>, 3> glyphs) {
  std::vector<ObjectSpec> specs;
  const std::array<int, 3> cats = {category::kCup, category::kFork, category::kBottle};
  for (int i = 0; i < 3; ++i) {
    ObjectSpec s;
    s.category = cats[i];
    s.identity = mix(seed, 100 + i);
    std::tie(s.w, s.h) = object_size(cats[i]);
    s.glyph = glyphs[i];
    specs.push_back(s);
  }
  return specs;
}

ViewParams user_params(Rng& rng) { return {100 + rng.uniform(-10, 10), 80 + rng.uniform(-10, 10), 1.0, 1.0, 0.0, 1.5}; }
ViewParams robot_params(Rng& rng) { return {200 + rng.uniform(-10, 10), 140 + rng.uniform(-10, 10), 1.12, 0.88, 22.0, 2.0}; }

}  // namespace

GrayImage draw_glyph(TaskId task, int size) {
  GrayImage g(size, size);
  constexpr int kSub = 4;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int ink = 0;
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx)
          ink += glyph_ink(task, (x + (sx + 0.5) / kSub) / size, (y + (sy + 0.5) / kSub) / size) ? 1 : 0;
      g.at(x, y) = to_byte(250.0 - 235.0 * ink / (kSub * kSub));
    }
  }
  return g;
}

Scenario generate_su_case(SuCase kind, std::uint64_t seed, int measurements) {
  Scenario s;
  s.kind = std::string(to_string(kind));
  s.name = s.kind + "-seed" + std::to_string(seed);
  s.seed = seed;
  s.width = kWidth;
  s.height = kHeight;
  s.map = CategoryMap::defaults();

  const bool same_table = kind == SuCase::Case1 || kind == SuCase::Case2;
  std::array<std::optional<TaskId>, 3> user_glyphs = {TaskId::Drink, TaskId::PlaceObject, TaskId::PickObject};
  if (kind == SuCase::Case2) user_glyphs = {TaskId::PlaceObject, TaskId::PlaceObject, TaskId::PlaceObject};
  auto user_specs = table_objects(mix(seed, 1), user_glyphs);
  if (kind == SuCase::Case2) {
    // The robot-side detector confuses every object with a class no task asks for.
    user_specs[0].reported_category = category::kSuitcase;
    user_specs[1].reported_category = category::kToothbrush;
    user_specs[2].reported_category = category::kBowl;
  }
  std::vector<ObjectSpec> robot_specs;
  if (!same_table) {
    std::array<std::optional<TaskId>, 3> robot_glyphs{};
    if (kind == SuCase::Case3Joint) robot_glyphs = {TaskId::PickObject, TaskId::Drink, TaskId::PlaceObject};
    robot_specs = table_objects(mix(seed, 2), robot_glyphs);
  }

  const bool with_depth = kind == SuCase::Case1;
  if (with_depth) s.rig = make_rig();

  struct VariantInfo {
    World user_world;
    ViewParams up, rp;
    std::optional<World> robot_world;
  };
  std::vector<VariantInfo> variants;
  for (int v = 0; v < kVariants; ++v) {
    Rng layout(mix(seed, 1000 + v));
    Rng noise(mix(seed, 2000 + v));
    VariantInfo info{compose(mix(seed, 11), user_specs, layout), user_params(layout), robot_params(layout), std::nullopt};
    s.images.push_back({"user/var" + std::to_string(v) + ".png", render_view(info.user_world.canvas, info.up, kWidth, kHeight, noise)});
    const World* rw = &info.user_world;
    if (!same_table) {
      info.robot_world = compose(mix(seed, 22), robot_specs, layout);
      rw = &*info.robot_world;
    }
    s.images.push_back({"robot/var" + std::to_string(v) + ".png", render_view(rw->canvas, info.rp, kWidth, kHeight, noise)});
    if (with_depth) {
      std::vector<BoundingBox> boxes;
      for (const auto& o : rw->objects) boxes.push_back(to_view(o.box, info.rp));
      s.depth_images.push_back({"depth/var" + std::to_string(v) + ".png", render_depth(*s.rig, boxes)});
    }
    variants.push_back(std::move(info));
  }

  Rng det_rng(mix(seed, 3));
  Rng gaze_rng(mix(seed, 4));
  const double sample_dt = 1.0 / 60.0;
  for (int m = 0; m < measurements; ++m) {
    const int v = m % kVariants;
    const auto& info = variants[v];
    const World& rw = info.robot_world ? *info.robot_world : info.user_world;
    const double t0 = m * kMeasurementPeriod;

    FrameRecord uf{m, t0, static_cast<std::size_t>(2 * v), detect_in_view(info.user_world, info.up, kWidth, kHeight, false, true, m, det_rng), std::nullopt};
    FrameRecord rf{m, t0, static_cast<std::size_t>(2 * v + 1), detect_in_view(rw, info.rp, kWidth, kHeight, true, kind == SuCase::Case3Joint, m, det_rng),
                   with_depth ? std::optional<std::size_t>(v) : std::nullopt};
    s.user_frames.push_back(std::move(uf));
    s.robot_frames.push_back(std::move(rf));

    const int target = m % 3;
    const auto& obj = info.user_world.objects[target];
    TruthEntry truth;
    truth.measurement = m;
    truth.t_start = t0;
    truth.t_end = t0 + kMeasurementPeriod;
    truth.user_frame = m;
    truth.robot_frame = m;
    truth.task = *obj.spec.glyph;
    truth.object_category = obj.spec.category;
    if (same_table) {
      truth.target_category = obj.spec.reported_category >= 0 ? obj.spec.reported_category : obj.spec.category;
      truth.target_box = to_view(obj.box, info.rp);
    }
    s.truth.push_back(truth);

    const BoundingBox g = to_view(*obj.glyph_box, info.up);
    const double gx = g.center_x(), gy = g.center_y();
    const double away_x = gaze_rng.uniform(150, 1130), away_y = gaze_rng.uniform(655, 700);
    const int n = static_cast<int>(std::round(kMeasurementPeriod / sample_dt));
    for (int i = 0; i < n; ++i) {
      const double t = t0 + 0.02 + i * sample_dt;
      const bool dwell = t < t0 + 0.02 + kDwellSeconds;
      double px = dwell ? gx : away_x, py = dwell ? gy : away_y;
      px += 1.2 * gaze_rng.normal();
      py += 1.2 * gaze_rng.normal();
      double conf = gaze_rng.uniform(0.96, 0.995);
      if (!dwell && gaze_rng.uniform() < 0.03) {
        // blink: confidence collapses and the estimate jumps
        conf = 0.2;
        px = gaze_rng.uniform(0, kWidth);
        py = gaze_rng.uniform(0, kHeight);
      }
      px = std::clamp(px, 0.0, static_cast<double>(kWidth));
      py = std::clamp(py, 0.0, static_cast<double>(kHeight));
      s.gaze.push_back({t, px / kWidth, 1.0 - py / kHeight, conf});
    }
  }
  s.validate();
  return s;
}

void generate_corpus(const fs::path& dir, std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream pairs(dir / "pairs.csv");
  if (!pairs) throw IoError("cannot write " + (dir / "pairs.csv").string());
  pairs << "query,train\n";
  const std::array<std::string, 3> names = {"cup", "fork", "bottle"};
  for (int scene = 0; scene < 2; ++scene) {
    const std::string tag = scene == 0 ? "indoor" : "outdoor";
    Rng layout(mix(seed, 500 + scene));
    Rng noise(mix(seed, 600 + scene));
    const auto specs = table_objects(mix(seed, 700 + scene), {TaskId::Drink, TaskId::PlaceObject, TaskId::PickObject});
    const World world = compose(mix(seed, 800 + scene), specs, layout);
    const ViewParams up = user_params(layout);
    ViewParams rp = robot_params(layout);
    if (scene == 1) {
      rp.gain = 1.25;
      rp.offset = -20.0;
    }
    const GrayImage user = render_view(world.canvas, up, kWidth, kHeight, noise);
    const GrayImage robot = render_view(world.canvas, rp, kWidth, kHeight, noise);
    const std::string train = "robot_" + tag + ".png";
    save_image(dir / train, robot);
    for (int i = 0; i < 3; ++i) {
      BoundingBox b = to_view(world.objects[i].box, up);
      b = BoundingBox{b.x - 16, b.y - 16, b.w + 32, b.h + 32}.clamped(kWidth, kHeight);
      const std::string query = names[i] + "_" + tag + ".png";
      save_image(dir / query, crop(user, b));
      pairs << query << ',' << train << '\n';
    }
  }
}

}  // namespace eyectl
