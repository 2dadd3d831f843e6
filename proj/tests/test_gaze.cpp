#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "eyectl/error.hpp"
#include "eyectl/gaze.hpp"
#include "test_util.hpp"

namespace eyectl {
namespace {

constexpr int kW = 1280, kH = 720;

std::vector<GazePoint> pixels(const std::vector<GazeSample>& s) { return ingest(s, kW, kH); }

/// Straight-loop I-DT: recomputes every window's dispersion from the raw samples.
std::vector<Fixation> oracle_idt(const std::vector<GazePoint>& p, double thr, double min_s, double max_s) {
  auto disp = [&](std::size_t a, std::size_t b) {
    double lx = 1e300, hx = -1e300, ly = 1e300, hy = -1e300;
    for (std::size_t k = a; k <= b; ++k) {
      lx = std::min(lx, p[k].x), hx = std::max(hx, p[k].x);
      ly = std::min(ly, p[k].y), hy = std::max(hy, p[k].y);
    }
    return (hx - lx) + (hy - ly);
  };
  std::vector<Fixation> out;
  std::size_t i = 0;
  while (i < p.size()) {
    std::size_t j = i;
    while (j < p.size() && p[j].t - p[i].t < min_s) ++j;
    if (j == p.size()) break;
    if (disp(i, j) > thr) {
      ++i;
      continue;
    }
    while (j + 1 < p.size() && p[j + 1].t - p[i].t <= max_s && disp(i, j + 1) <= thr) ++j;
    Fixation f;
    for (std::size_t k = i; k <= j; ++k) f.center_x += p[k].x, f.center_y += p[k].y, f.mean_confidence += p[k].confidence;
    const double n = static_cast<double>(j - i + 1);
    f.center_x /= n, f.center_y /= n, f.mean_confidence /= n;
    f.onset = p[i].t;
    f.duration = p[j].t - p[i].t;
    f.dispersion = disp(i, j);
    out.push_back(f);
    i = j + 1;
  }
  return out;
}

void append_dwell(std::vector<GazeSample>& s, double& t, double x, double y, double seconds, double jitter,
                  std::mt19937_64& rng, double dt = 0.01) {
  std::uniform_real_distribution<double> u(-jitter, jitter);
  const int n = static_cast<int>(std::lround(seconds / dt));
  for (int k = 0; k < n; ++k, t += dt) s.push_back({t, x + u(rng), y + u(rng), 1.0});
}

TEST(Gaze, IngestionFlipsTheVerticalAxisAndClamps) {
  const auto p = to_pixels({0.0, 0.0, 0.0, 1.0}, kW, kH);
  EXPECT_DOUBLE_EQ(p.x, 0.0);
  EXPECT_DOUBLE_EQ(p.y, kH);
  const auto q = to_pixels({0.0, 1.5, 1.0, 2.0}, kW, kH);
  EXPECT_DOUBLE_EQ(q.x, kW);
  EXPECT_DOUBLE_EQ(q.y, 0.0);
  EXPECT_DOUBLE_EQ(q.confidence, 1.0);
  const auto c = to_pixels({0.0, 0.25, 0.25, 1.0}, kW, kH);
  EXPECT_DOUBLE_EQ(c.x, 320.0);
  EXPECT_DOUBLE_EQ(c.y, 540.0);
}

TEST(Gaze, EmptyStreamThrows) {
  EXPECT_THROW(detect_fixations({}, DwellParams{}), EmptyStream);
}

TEST(Gaze, ConstantDwellIsOneFixationAtCentre) {
  std::vector<GazeSample> s;
  for (int k = 0; k < 50; ++k) s.push_back({k * 0.01, 0.5, 0.5, 1.0});
  const auto fx = detect_fixations(pixels(s), DwellParams{});
  ASSERT_EQ(fx.size(), 1u);
  EXPECT_DOUBLE_EQ(fx[0].center_x, 640.0);
  EXPECT_DOUBLE_EQ(fx[0].center_y, 360.0);
  EXPECT_DOUBLE_EQ(fx[0].dispersion, 0.0);
  EXPECT_DOUBLE_EQ(fx[0].onset, 0.0);
  EXPECT_NEAR(fx[0].duration, 0.49, 1e-12);
}

TEST(Gaze, AlternatingCornersNeverFixate) {
  std::vector<GazeSample> s;
  for (int k = 0; k < 300; ++k) s.push_back({k * 0.01, k % 2 ? 0.0 : 1.0, k % 2 ? 0.0 : 1.0, 1.0});
  EXPECT_TRUE(detect_fixations(pixels(s), DwellParams{}).empty());
}

TEST(Gaze, TwoDwellsAroundASaccade) {
  std::vector<GazeSample> s;
  std::mt19937_64 rng(3);
  double t = 0.0;
  append_dwell(s, t, 0.30, 0.50, 0.40, 0.002, rng);
  for (int k = 0; k < 10; ++k, t += 0.01) s.push_back({t, 0.30 + 0.04 * (k + 1), 0.50 + (k % 2 ? 0.1 : -0.1), 1.0});
  append_dwell(s, t, 0.70, 0.50, 0.40, 0.002, rng);
  const auto p = pixels(s);
  const auto fx = detect_fixations(p, DwellParams{});
  const auto ref = oracle_idt(p, 25.0, 0.3, 0.9);
  ASSERT_EQ(fx.size(), 2u);
  ASSERT_EQ(ref.size(), 2u);
  EXPECT_NEAR(fx[0].onset, 0.0, 1e-9);
  EXPECT_NEAR(fx[1].onset, 0.50, 1e-9);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(fx[i].onset, ref[i].onset);
    EXPECT_DOUBLE_EQ(fx[i].duration, ref[i].duration);
    EXPECT_NEAR(fx[i].center_x, ref[i].center_x, 1e-9);
    EXPECT_NEAR(fx[i].center_y, ref[i].center_y, 1e-9);
    EXPECT_NEAR(fx[i].dispersion, ref[i].dispersion, 1e-9);
  }
}

TEST(Gaze, RandomStreamsMatchTheOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<GazeSample> s;
    double t = 0.0;
    for (int seg = 0; seg < 12; ++seg) {
      const double jitter = u01(rng) < 0.5 ? 0.003 : 0.03 * u01(rng);
      append_dwell(s, t, u01(rng), u01(rng), 0.1 + 1.4 * u01(rng), jitter, rng);
    }
    const auto p = pixels(s);
    DwellParams params{10.0 + 50.0 * u01(rng), 150.0 + 300.0 * u01(rng)};
    const double cap = 0.5 + u01(rng);
    const auto got = detect_fixations(p, params, cap);
    const auto ref = oracle_idt(p, params.dispersion_px, params.min_duration_ms / 1000.0, std::max(cap, params.min_duration_ms / 1000.0));
    ASSERT_EQ(got.size(), ref.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_DOUBLE_EQ(got[i].onset, ref[i].onset);
      EXPECT_DOUBLE_EQ(got[i].duration, ref[i].duration);
      EXPECT_NEAR(got[i].center_x, ref[i].center_x, 1e-9);
      EXPECT_NEAR(got[i].dispersion, ref[i].dispersion, 1e-9);
      EXPECT_LE(got[i].dispersion, params.dispersion_px);
      EXPECT_GE(got[i].duration + 1e-12, params.min_duration_ms / 1000.0);
      if (i > 0) EXPECT_GT(got[i].onset, got[i - 1].end());
    }
    EXPECT_EQ(detect_fixations(p, params, cap).size(), got.size());
  }
}

TEST(Gaze, ContinuousDwellUpdatesUnderOneSecond) {
  std::vector<GazeSample> s;
  for (int k = 0; k < 500; ++k) s.push_back({k * 0.01, 0.4, 0.4, 1.0});
  const auto fx = detect_fixations(pixels(s), DwellParams{});
  ASSERT_GE(fx.size(), 5u);
  for (std::size_t i = 1; i < fx.size(); ++i) EXPECT_LT(fx[i].end() - fx[i - 1].end(), 1.0);
}

// Streams of well-separated dwells that are either clean (inside every tested bound) or noisy
// (outside the tightest one). On this family a tighter bound can only reject windows. A dwell
// whose jitter straddles the tight bound can split into more fixations, so it is excluded.
TEST(Gaze, TighterDispersionNeverAddsFixations) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GazeSample> s;
    double t = 0.0;
    for (int seg = 0; seg < 10; ++seg) {
      // Alternate screen halves so consecutive segments sit > 500 px apart.
      const double x = (seg % 2 ? 0.75 : 0.25) + 0.1 * (u01(rng) - 0.5);
      const double y = 0.3 + 0.4 * u01(rng);
      const bool noisy = u01(rng) < 0.4;
      const double jitter = noisy ? (12.0 + 18.0 * u01(rng)) / kW : 1.5 / kW;
      append_dwell(s, t, x, y, 0.35 + 0.5 * u01(rng), jitter, rng);
    }
    const auto p = pixels(s);
    const double tight = 10.0 + 15.0 * u01(rng);
    const double loose = tight + 60.0 * u01(rng);
    const auto a = detect_fixations(p, DwellParams{tight, 300.0});
    const auto b = detect_fixations(p, DwellParams{loose, 300.0});
    EXPECT_LE(a.size(), b.size()) << "trial " << trial;
    for (const auto& f : a) {
      const bool covered = std::any_of(b.begin(), b.end(), [&](const Fixation& g) {
        return g.onset <= f.onset + 1e-12 && f.end() <= g.end() + 1e-12;
      });
      EXPECT_TRUE(covered) << "trial " << trial << " onset " << f.onset;
    }
  }
}

Detection pictogram(TaskId task, BoundingBox box) { return {box, task_category(task), 0.9, 0}; }
Detection object(int category, BoundingBox box) { return {box, category, 0.9, 0}; }

Fixation fixation_at(double x, double y, double conf = 1.0) {
  Fixation f;
  f.center_x = x;
  f.center_y = y;
  f.duration = 0.3;
  f.mean_confidence = conf;
  return f;
}

TEST(Gaze, PictogramUnderTheFixation) {
  const std::vector<Detection> d = {pictogram(TaskId::Drink, {100, 100, 40, 40}),
                                    pictogram(TaskId::Eat, {300, 100, 40, 40})};
  EXPECT_EQ(select_pictogram(fixation_at(120, 120), d), d[0]);
  EXPECT_FALSE(select_pictogram(fixation_at(200, 200), d).has_value());
  EXPECT_EQ(select_pictogram(fixation_at(140, 140), d), d[0]);  // inclusive edge
}

TEST(Gaze, OverlappingPictogramsResolveByDistanceThenIndex) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 300.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Detection> d;
    for (int k = 0; k < 6; ++k) d.push_back(pictogram(kAllTasks[k], {u(rng), u(rng), 20 + u(rng) / 2, 20 + u(rng) / 2}));
    const auto f = fixation_at(u(rng), u(rng));
    std::optional<std::size_t> best;
    double best_d = 1e300;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& b = d[i].box;
      if (f.center_x < b.x || f.center_x > b.x + b.w || f.center_y < b.y || f.center_y > b.y + b.h) continue;
      const double dd = std::hypot(b.x + b.w / 2 - f.center_x, b.y + b.h / 2 - f.center_y);
      if (dd < best_d) best_d = dd, best = i;
    }
    const auto got = select_pictogram(f, d);
    ASSERT_EQ(got.has_value(), best.has_value());
    if (best) EXPECT_EQ(*got, d[*best]);
  }
  const std::vector<Detection> twins = {pictogram(TaskId::Brush, {0, 0, 20, 20}), pictogram(TaskId::Eat, {0, 0, 20, 20})};
  EXPECT_EQ(select_pictogram(fixation_at(5, 5), twins)->category_id, task_category(TaskId::Brush));
}

TEST(Gaze, ObjectsAreNotPictograms) {
  const std::vector<Detection> d = {object(category::kCup, {0, 0, 100, 100})};
  EXPECT_FALSE(select_pictogram(fixation_at(50, 50), d).has_value());
  EXPECT_TRUE(select_object(fixation_at(50, 50), d).has_value());
}

TEST(Selection, DrinkPictogramSendsAMessage) {
  const auto map = CategoryMap::defaults();
  const std::vector<Detection> d = {object(category::kCup, {80, 80, 120, 160}), pictogram(TaskId::Drink, {100, 100, 40, 40})};
  auto [state, msg] = step_selection({}, fixation_at(120, 120), d, map, 1.0);
  ASSERT_TRUE(msg.has_value());
  EXPECT_EQ(msg->task, TaskId::Drink);
  EXPECT_FALSE(msg->has_secondary);
  EXPECT_EQ(msg->object_category, category::kCup);
  EXPECT_EQ(msg->box, d[1].box);
  EXPECT_TRUE(state.idle());
}

TEST(Selection, FillCupWaitsForASecondaryObject) {
  const auto map = CategoryMap::defaults();
  const std::vector<Detection> d = {object(category::kBottle, {80, 80, 120, 200}),
                                    pictogram(TaskId::FillCup, {100, 100, 40, 40}),
                                    object(category::kCup, {400, 100, 100, 100})};
  auto [s1, m1] = step_selection({}, fixation_at(120, 120), d, map, 1.0);
  EXPECT_FALSE(m1.has_value());
  ASSERT_FALSE(s1.idle());
  // Gazing at the carrier object itself does not complete the selection.
  auto [s2, m2] = step_selection(s1, fixation_at(150, 250), d, map, 1.5);
  EXPECT_FALSE(m2.has_value());
  auto [s3, m3] = step_selection(s2, fixation_at(450, 150), d, map, 2.0);
  ASSERT_TRUE(m3.has_value());
  EXPECT_TRUE(m3->has_secondary);
  EXPECT_EQ(m3->task, TaskId::FillCup);
  EXPECT_EQ(m3->box, d[1].box);
  EXPECT_EQ(m3->secondary_box, d[2].box);
  EXPECT_EQ(m3->secondary_category, category::kCup);
  EXPECT_TRUE(s3.idle());
}

TEST(Selection, RepeatWithinDebounceIsSuppressed) {
  const auto map = CategoryMap::defaults();
  const std::vector<Detection> d = {pictogram(TaskId::Eat, {100, 100, 40, 40})};
  auto [s1, m1] = step_selection({}, fixation_at(120, 120), d, map, 1.0);
  EXPECT_TRUE(m1.has_value());
  auto [s2, m2] = step_selection(s1, fixation_at(121, 119), d, map, 1.0 + 0.5 * kDebounceSeconds);
  EXPECT_FALSE(m2.has_value());
  // Each suppressed repeat extends the window; a pause longer than it re-arms the selection.
  auto [s3, m3] = step_selection(s2, fixation_at(120, 120), d, map, 1.0 + 2.0 * kDebounceSeconds);
  EXPECT_TRUE(m3.has_value());
}

TEST(Selection, LowConfidenceIsIgnored) {
  const auto map = CategoryMap::defaults();
  const std::vector<Detection> d = {pictogram(TaskId::Eat, {100, 100, 40, 40})};
  auto [state, msg] = step_selection({}, fixation_at(120, 120, 0.94), d, map, 1.0);
  EXPECT_FALSE(msg.has_value());
  EXPECT_TRUE(state.idle());
  EXPECT_FALSE(state.debounce_key.has_value());
}

TEST(Selection, ReplayAuditAndCategoryConsistency) {
  const auto map = CategoryMap::defaults();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 600.0);
  const std::vector<int> objects = {category::kCup, category::kBottle, category::kFork, category::kBowl, 999};
  std::size_t emitted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> d;
    for (int k = 0; k < 4; ++k) {
      const BoundingBox ob{u(rng), u(rng), 60 + u(rng) / 4, 60 + u(rng) / 4};
      d.push_back(object(objects[rng() % objects.size()], ob));
      d.push_back(pictogram(kAllTasks[rng() % 8], {ob.x + 10, ob.y + 10, 30, 30}));
    }
    SelectionState state;
    std::vector<Fixation> history;
    for (int step = 0; step < 30; ++step) {
      const Detection& aim = d[rng() % d.size()];
      const auto f = fixation_at(aim.box.center_x() + (u(rng) - 300) / 40, aim.box.center_y() + (u(rng) - 300) / 40,
                                 u(rng) < 30 ? 0.5 : 1.0);
      history.push_back(f);
      auto [next, msg] = step_selection(state, f, d, map, step * 0.7);
      state = next;
      if (!msg) continue;
      ++emitted;
      const bool fixated = std::any_of(history.begin(), history.end(), [&](const Fixation& h) {
        return h.mean_confidence >= kMinSelectionConfidence && msg->box.contains(h.center_x, h.center_y);
      });
      EXPECT_TRUE(fixated);
      if (!msg->has_secondary) EXPECT_TRUE(resolve_task(msg->task, map).count(msg->object_category));
      else EXPECT_TRUE(map.needs_secondary(msg->task));
    }
  }
  EXPECT_GT(emitted, 100u);
}

TEST(Gaze, FileRoundTrip) {
  testing::TempDir dir("gaze");
  const std::vector<GazeSample> s = {{0.0, 0.1, 0.2, 0.99}, {0.01, 0.3, 0.4, 0.5}};
  save_gaze(dir / "g.jsonl", s);
  const auto back = load_gaze(dir / "g.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_DOUBLE_EQ(back[1].x, 0.3);
  EXPECT_DOUBLE_EQ(back[1].confidence, 0.5);
  EXPECT_THROW(load_gaze(dir / "none.jsonl"), IoError);
}

}  // namespace
}  // namespace eyectl
