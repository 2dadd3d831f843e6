#include "eyectl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "eyectl/error.hpp"
#include "eyectl/gaze.hpp"
#include "eyectl/geometry.hpp"

namespace eyectl {

namespace fs = std::filesystem;

namespace {

const TruthEntry* truth_for(const Scenario& s, double t) {
  for (const auto& e : s.truth) {
    if (e.t_start <= t && t < e.t_end) return &e;
  }
  return nullptr;
}

}  // namespace

RunResult run_scenario(const Scenario& s, const PipelineConfig& cfg) {
  cfg.validate();
  s.validate();
  if (s.gaze.empty()) throw ScenarioError("scenario has no gaze samples");
  const auto points = ingest(s.gaze, s.width, s.height);
  const auto fixations = detect_fixations(points, cfg.dwell);

  std::vector<MeasurementRecord> raw;
  std::vector<nlohmann::ordered_json> raw_log;
  SelectionState state;
  for (const auto& fix : fixations) {
    const FrameRecord* uf = s.user_frame_at(fix.onset);
    if (!uf) continue;
    auto [next, msg] = step_selection(state, fix, uf->detections, s.map, fix.end());
    state = std::move(next);
    if (!msg) continue;

    const TruthEntry* truth = truth_for(s, msg->timestamp);
    if (!truth) throw ScenarioError("selection at t=" + std::to_string(msg->timestamp) + " matches no scripted window", uf->frame);
    const FrameRecord* rf = s.robot_frame_at(msg->timestamp);
    if (!rf) throw ScenarioError("selection precedes the first robot frame", uf->frame);

    const Detection pictogram{msg->box, task_category(msg->task), 1.0, uf->frame};
    const SceneView user_view = s.view(*uf);
    const SceneView robot_view = s.view(*rf);
    const auto start = std::chrono::steady_clock::now();
    SelectionOutcome outcome = fallback_select(user_view, pictogram, msg->task, robot_view, s.map, cfg);
    const double elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    MeasurementRecord r;
    r.measurement = truth->measurement;
    r.frame = uf->frame;
    r.t = msg->timestamp;
    r.task = msg->task;
    r.pictogram = msg->box;
    r.object_category = truth->object_category;
    r.correct = outcome.sent && outcome.target && truth->target_box && iou(outcome.target->box, *truth->target_box) >= 0.5;
    r.elapsed_ms = elapsed_ms;
    r.outcome = std::move(outcome);

    auto line = outcome_json(r.frame, r.task, r.outcome, r.elapsed_ms);
    line["measurement"] = r.measurement;
    line["object_category"] = r.object_category;
    line["correct"] = r.correct;
    if (s.rig && rf->depth && r.outcome.sent && r.outcome.target) {
      const auto cloud = extract_object_cloud(s.depth_images[*rf->depth].pixels, *s.rig, r.outcome.target->box);
      line["cloud_points"] = cloud.size();
      if (!cloud.empty()) {
        const Point3 c = object_pose_world(cloud, RigidTransform(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                                                                 Frame::Color, Frame::Color));
        line["object_position_color"] = {c.x, c.y, c.z};
      }
    }
    raw.push_back(std::move(r));
    raw_log.push_back(std::move(line));
  }

  RunResult result;
  // remove_duplicates keeps records in order, so the surviving log lines follow by index.
  const auto kept = remove_duplicates(raw, kDebounceSeconds);
  std::size_t j = 0;
  for (std::size_t i = 0; i < raw.size() && j < kept.size(); ++i) {
    if (raw[i].t == kept[j].t && raw[i].measurement == kept[j].measurement) {
      result.log.push_back(raw_log[i]);
      ++j;
    }
  }
  result.records = kept;
  result.metrics = compute_metrics(result.records);
  result.metrics.duplicates_removed = raw.size() - kept.size();
  for (const auto& e : s.truth) {
    if (std::none_of(kept.begin(), kept.end(), [&](const MeasurementRecord& r) { return r.measurement == e.measurement; })) {
      ++result.metrics.missed_selections;
    }
  }
  return result;
}

void write_run_outputs(const fs::path& dir, const std::string& name, const RunResult& r) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_metrics_json(dir / "metrics.json", name, r.metrics);
  const std::pair<std::string, Metrics> row{name, r.metrics};
  write_metrics_csv(dir / "metrics.csv", std::span(&row, 1));
  std::ofstream out(dir / "outcomes.jsonl");
  if (!out) throw IoError("cannot write " + (dir / "outcomes.jsonl").string());
  for (const auto& line : r.log) out << line.dump() << '\n';
}

std::string bench_label(DetectorKind d, MatcherKind m) {
  return std::string(to_string(m)) + "-" + std::string(to_string(d));
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

bool is_image(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

}  // namespace

std::vector<BenchRow> bench_detectors(const fs::path& corpus, const PipelineConfig& cfg, int repetitions) {
  if (!fs::is_directory(corpus)) throw CorpusError("corpus directory not found: " + corpus.string());
  std::vector<std::pair<std::string, std::string>> pairs;
  if (fs::exists(corpus / "pairs.csv")) {
    std::ifstream in(corpus / "pairs.csv");
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw CorpusError("pairs.csv: malformed line '" + line + "'");
      pairs.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
  } else {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(corpus)) {
      if (e.is_regular_file() && is_image(e.path())) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) pairs.emplace_back(n, n);
  }
  if (pairs.empty()) throw CorpusError("corpus has no images: " + corpus.string());

  std::map<std::string, GrayImage> images;
  for (const auto& [q, t] : pairs) {
    for (const auto& name : {q, t}) {
      if (images.count(name)) continue;
      try {
        images.emplace(name, load_gray(corpus / name));
      } catch (const Error& e) {
        throw CorpusError("cannot load corpus image " + name + ": " + e.what());
      }
    }
  }

  std::vector<BenchRow> rows;
  for (MatcherKind m : {MatcherKind::BruteForce, MatcherKind::Approximate}) {
    for (DetectorKind d : {DetectorKind::AKAZE, DetectorKind::ORB}) {
      PipelineConfig c = cfg;
      c.detector = d;
      c.matcher = m;
      std::vector<double> totals, per_match, counts;
      for (const auto& [q, t] : pairs) {
        std::vector<double> times;
        std::size_t n = 0;
        for (int rep = 0; rep < std::max(1, repetitions); ++rep) {
          const auto start = std::chrono::steady_clock::now();
          const FeatureSet fq = detect_features(images.at(q), d);
          const FeatureSet ft = detect_features(images.at(t), d);
          n = match_and_filter(fq, ft, c).size();
          times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        std::sort(times.begin(), times.end());
        const double median = times[times.size() / 2];
        totals.push_back(median);
        counts.push_back(static_cast<double>(n));
        if (n > 0) per_match.push_back(1000.0 * median / static_cast<double>(n));
      }
      BenchRow row;
      row.detector = d;
      row.matcher = m;
      row.items = pairs.size();
      std::tie(row.total_s_mean, row.total_s_sd) = mean_sd(totals);
      std::tie(row.matches_mean, row.matches_sd) = mean_sd(counts);
      if (!per_match.empty()) {
        const auto [pm, ps] = mean_sd(per_match);
        row.ms_per_match_mean = pm;
        row.ms_per_match_sd = ps;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const fs::path& path, std::span<const BenchRow> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "Algorithm,Total computation time (sec) mean,Total computation time (sec) SD,"
         "Computation time/feature matched (ms) mean,Computation time/feature matched (ms) SD,"
         "Features matched mean,Features matched SD\n";
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << bench_label(r.detector, r.matcher) << ',' << num(r.total_s_mean) << ',' << num(r.total_s_sd) << ','
        << (r.ms_per_match_mean ? num(*r.ms_per_match_mean) : "NA") << ','
        << (r.ms_per_match_sd ? num(*r.ms_per_match_sd) : "NA") << ',' << num(r.matches_mean) << ','
        << num(r.matches_sd) << '\n';
  }
}

namespace {

// 5x7 digit bitmaps, one byte per row, bit 4 = leftmost column.
constexpr std::uint8_t kDigits[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};

constexpr std::uint8_t kPalette[6][3] = {{255, 64, 64}, {64, 220, 64}, {64, 128, 255},
                                         {255, 200, 0}, {255, 0, 255}, {0, 220, 220}};

void put(ColorImage& img, int x, int y, const std::uint8_t* rgb) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  std::copy_n(rgb, 3, img.px(x, y));
}

void line(ColorImage& img, int x0, int y0, int x1, int y1, const std::uint8_t* rgb) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    put(img, x0, y0, rgb);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace

ColorImage render_matches(const GrayImage& a, std::span<const Keypoint> ka, const GrayImage& b,
                          std::span<const Keypoint> kb, std::span<const MatchPair> matches) {
  ColorImage out(a.width + b.width, std::max(a.height, b.height));
  auto blit = [&](const GrayImage& g, int ox) {
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) {
        auto* p = out.px(ox + x, y);
        p[0] = p[1] = p[2] = g.at(x, y);
      }
  };
  blit(a, 0);
  blit(b, a.width);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    const auto* rgb = kPalette[i % 6];
    const int x0 = static_cast<int>(std::lround(ka[m.query_idx].x)), y0 = static_cast<int>(std::lround(ka[m.query_idx].y));
    const int x1 = a.width + static_cast<int>(std::lround(kb[m.train_idx].x));
    const int y1 = static_cast<int>(std::lround(kb[m.train_idx].y));
    line(out, x0, y0, x1, y1, rgb);
    for (int d = -2; d <= 2; ++d) {
      put(out, x0 + d, y0, rgb);
      put(out, x0, y0 + d, rgb);
      put(out, x1 + d, y1, rgb);
      put(out, x1, y1 + d, rgb);
    }
  }

  constexpr int kScale = 3;
  const std::string text = std::to_string(matches.size());
  const std::uint8_t black[3] = {0, 0, 0}, white[3] = {255, 255, 255};
  const int box_w = static_cast<int>(text.size()) * 6 * kScale + 2 * kScale;
  const int box_h = 9 * kScale;
  for (int y = 0; y < box_h; ++y)
    for (int x = 0; x < box_w; ++x) put(out, 4 + x, 4 + y, black);
  for (std::size_t c = 0; c < text.size(); ++c) {
    const auto& glyph = kDigits[text[c] - '0'];
    const int ox = 4 + kScale + static_cast<int>(c) * 6 * kScale;
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col) {
        if (!((glyph[row] >> (4 - col)) & 1)) continue;
        for (int sy = 0; sy < kScale; ++sy)
          for (int sx = 0; sx < kScale; ++sx) put(out, ox + col * kScale + sx, 4 + kScale + row * kScale + sy, white);
      }
  }
  return out;
}

}  // namespace eyectl
