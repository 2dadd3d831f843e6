// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "eyectl/error.hpp"
#include "eyectl/features.hpp"
#include "eyectl/geometry.hpp"
#include "eyectl/harness.hpp"
#include "eyectl/matching.hpp"
#include "eyectl/metrics.hpp"
#include "eyectl/synth.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace eyectl;
using testing::TempDir;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + EYECTL_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- 1 ----

Verdict metric_definitions() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<MeasurementRecord> recs(10);
  for (int i = 0; i < 10; ++i) {
    recs[i].measurement = i;
    recs[i].t = 2.0 * i;
    recs[i].pictogram = {10.0 * i, 0, 5, 5};
    recs[i].object_category = 47;
    recs[i].outcome.sent = i < 5;
    recs[i].correct = i < 4;
  }
  const Metrics m = compute_metrics(recs);
  const double secs = seconds_since(start);
  const bool ok = m.task_sent_rate && m.task_selection_success_rate && *m.task_sent_rate == 0.5 &&
                  *m.task_selection_success_rate == 0.8 && m.total_measurements == 10 && secs < 1.0;
  return {ok, fmt("sent rate %.4f, success rate %.4f, %.3f s", m.task_sent_rate.value_or(-1),
                  m.task_selection_success_rate.value_or(-1), secs)};
}

// ---- 2 ----

int byte_popcount_distance(const DescriptorMatrix& a, std::size_t i, const DescriptorMatrix& b, std::size_t j) {
  int d = 0;
  for (int byte = 0; byte < a.stride(); ++byte) d += std::popcount(static_cast<unsigned>(a.row(i)[byte] ^ b.row(j)[byte]));
  return d;
}

Verdict bruteforce_oracle() {
  std::mt19937_64 rng(2);
  std::size_t mismatches = 0, rows = 0;
  double knn_secs = 0.0;
  for (int bits : {256, 488}) {
    const auto query = testing::random_descriptors(1000, bits, rng);
    const auto train = testing::random_descriptors(1000, bits, rng);
    const auto start = std::chrono::steady_clock::now();
    const KnnResult got = knn_bruteforce(query, train, 2);
    knn_secs += seconds_since(start);
    for (std::size_t i = 0; i < query.rows(); ++i, ++rows) {
      std::vector<std::pair<int, std::size_t>> all;
      for (std::size_t j = 0; j < train.rows(); ++j) all.emplace_back(byte_popcount_distance(query, i, train, j), j);
      std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      bool same = got[i].size() == 2;
      for (std::size_t r = 0; same && r < 2; ++r) {
        same = got[i][r].query_idx == i && got[i][r].train_idx == all[r].second && got[i][r].distance == all[r].first;
      }
      mismatches += !same;
    }
  }
  return {mismatches == 0 && knn_secs < 10.0, fmt("%zu rows, %zu mismatches, knn %.2f s", rows, mismatches, knn_secs)};
}

// ---- 3 ----

Verdict approximate_recall() {
  TempDir dir("acc_recall");
  generate_corpus(dir.path(), 3);
  DescriptorMatrix train(0, kAkazeDescriptorBits), query(0, kAkazeDescriptorBits);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (const auto& e : fs::directory_iterator(dir.path())) {
    if (e.path().extension() != ".png" || train.rows() >= 1000) continue;
    const auto img = load_gray(e.path());
    auto noisy = img;
    for (auto& p : noisy.data) p = static_cast<std::uint8_t>(std::clamp(p + noise(rng), 0.0, 255.0));
    const auto a = detect_akaze(img), b = detect_akaze(noisy);
    for (std::size_t i = 0; i < a.descriptors.rows() && train.rows() < 1000; ++i) train.push_back(a.descriptors.row(i));
    for (std::size_t i = 0; i < b.descriptors.rows() && query.rows() < 1000; ++i) query.push_back(b.descriptors.row(i));
  }
  if (train.rows() < 1000) return {false, fmt("corpus yields only %zu AKAZE descriptors", train.rows())};
  const auto start = std::chrono::steady_clock::now();
  const auto approx = knn_approx(query, train, 1, 0);
  const double secs = seconds_since(start);
  const auto exact = knn_bruteforce(query, train, 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) hits += !approx[i].empty() && approx[i][0].distance == exact[i][0].distance;
  const double recall = static_cast<double>(hits) / static_cast<double>(exact.size());
  return {recall >= 0.9 && secs < 30.0,
          fmt("top-1 recall %.4f over %zu queries against %zu descriptors, %.2f s", recall, exact.size(), train.rows(), secs)};
}

// ---- 4 ----

Verdict ratio_properties() {
  std::mt19937_64 rng(4);
  KnnResult rows(10000);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int d1 = static_cast<int>(rng() % 250);
    const int d2 = d1 + static_cast<int>(rng() % 150);
    rows[i] = {{i, rng() % 500, d1}, {i, rng() % 500, d2}};
    if (rng() % 50 == 0) rows[i].pop_back();
  }
  const double ratios[] = {0.6, 0.65, 0.75};
  std::vector<std::set<std::size_t>> kept;
  std::size_t violations = 0;
  for (double r : ratios) {
    const auto out = ratio_filter(rows, r);
    std::set<std::size_t> ids;
    std::size_t prev = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto& row = rows[out[k].query_idx];
      violations += !(out[k] == row[0]);                                         // a best pair of its row
      violations += !(row.size() >= 2 && row[0].distance < r * row[1].distance);  // passes the test
      violations += k > 0 && out[k].query_idx <= prev;                             // query order
      prev = out[k].query_idx;
      ids.insert(out[k].query_idx);
    }
    std::size_t expected = 0;
    for (const auto& row : rows) expected += row.size() >= 2 && row[0].distance < r * row[1].distance;
    violations += expected != out.size();
    kept.push_back(std::move(ids));
  }
  for (std::size_t i = 1; i < kept.size(); ++i) {
    violations += !std::includes(kept[i].begin(), kept[i].end(), kept[i - 1].begin(), kept[i - 1].end());
  }
  return {violations == 0, fmt("10000 rows, kept %zu/%zu/%zu, %zu violations", kept[0].size(), kept[1].size(),
                               kept[2].size(), violations)};
}

// ---- 5 ----

/// Scalar nested loop: pinhole deprojection z * (u - cx) / fx, then R p + t written out term by term.
std::vector<Eigen::Vector3d> oracle_cloud(const DepthImage& depth, const CameraRig& rig, const BoundingBox& box) {
  const Eigen::Matrix3d R = rig.depth_to_color.rotation();
  const Eigen::Vector3d t = rig.depth_to_color.translation();
  std::vector<Eigen::Vector3d> out;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const std::uint16_t raw = depth.data[static_cast<std::size_t>(v) * depth.width + u];
      if (raw == 0) continue;
      const double z = raw * rig.depth_scale;
      const double x = z * (u - rig.depth.cx) / rig.depth.fx;
      const double y = z * (v - rig.depth.cy) / rig.depth.fy;
      double pc[3];
      for (int i = 0; i < 3; ++i) pc[i] = R(i, 0) * x + R(i, 1) * y + R(i, 2) * z + t(i);
      if (pc[2] <= 0.0) continue;
      const double uc = rig.color.fx * pc[0] / pc[2] + rig.color.cx;
      const double vc = rig.color.fy * pc[1] / pc[2] + rig.color.cy;
      if (uc >= box.x && uc <= box.x + box.w && vc >= box.y && vc <= box.y + box.h) out.emplace_back(pc[0], pc[1], pc[2]);
    }
  }
  return out;
}

Verdict geometry() {
  const auto start = std::chrono::steady_clock::now();
  const Intrinsics k{910.0, 908.0, 639.5, 359.5, 1280, 720};
  double worst = 0.0;
  for (int v = 0; v < 720; ++v) {
    for (int u = 0; u < 1280; ++u) {
      const Point3 p = deproject(static_cast<double>(u), static_cast<double>(v), 1.25, k);
      const auto px = project(p, k);
      worst = px ? std::max(worst, std::hypot(px->u - u, px->v - v)) : INFINITY;
    }
  }
  CameraRig identity;
  identity.depth = identity.color = k;
  const CalibrationReport rep = check_calibration(identity);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::size_t bad_rigs = 0, points = 0;
  double max_dev = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CameraRig rig;
    rig.depth = {300 + 200 * u01(rng), 300 + 200 * u01(rng), 80 + 10 * u01(rng), 60 + 10 * u01(rng), 160, 120};
    rig.color = {400 + 400 * u01(rng), 400 + 400 * u01(rng), 150 + 20 * u01(rng), 110 + 20 * u01(rng), 320, 240};
    const Eigen::Matrix3d R =
        Eigen::AngleAxisd(0.05 * u01(rng), Eigen::Vector3d(u01(rng), u01(rng), 1).normalized()).toRotationMatrix();
    rig.depth_to_color = RigidTransform(R, {0.05 * (u01(rng) - 0.5), 0.02 * (u01(rng) - 0.5), 0.01 * u01(rng)});
    rig.depth_scale = 0.001;
    DepthImage d(160, 120, 0);
    for (auto& raw : d.data) raw = u01(rng) < 0.1 ? 0 : static_cast<std::uint16_t>(400 + 3000 * u01(rng));
    const BoundingBox box{320 * u01(rng) * 0.6, 240 * u01(rng) * 0.6, 20 + 100 * u01(rng), 20 + 80 * u01(rng)};
    const auto got = extract_object_cloud(d, rig, box);
    const auto ref = oracle_cloud(d, rig, box);
    bool same = got.size() == ref.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      max_dev = std::max(max_dev, (got[i].vec() - ref[i]).cwiseAbs().maxCoeff());
      same = got[i].vec() == ref[i];
    }
    bad_rigs += !same;
    points += ref.size();
  }
  const double secs = seconds_since(start);
  const bool ok = worst < 1e-6 && rep.max_roundtrip_px < 1e-6 && rep.samples == 1280u * 720u && bad_rigs == 0 && secs < 30.0;
  return {ok, fmt("grid round trip %.2e px, rig round trip %.2e px over %zu px; clouds: %zu/20 rigs differ "
                  "(%zu points, max deviation %.1e m); %.2f s",
                  worst, rep.max_roundtrip_px, rep.samples, bad_rigs, points, max_dev, secs)};
}

// ---- 6, 7, 8 ----

constexpr int kMeasurements = 100;
constexpr std::uint64_t kSeed = 42;

Verdict case_one() {
  const RunResult r = run_scenario(generate_su_case(SuCase::Case1, kSeed, kMeasurements), PipelineConfig{});
  const auto& m = r.metrics;
  const double success = m.task_selection_success_rate.value_or(0.0);
  return {success >= 0.95 && m.total_measurements > 0 && m.mean_selection_time_ms < 500.0,
          fmt("%zu measurements, %zu sent, %zu correct, success %.4f, mean %.1f ms (sd %.1f)", m.total_measurements,
              m.messages_sent, m.correct_sent, success, m.mean_selection_time_ms, m.sd_selection_time_ms)};
}

Verdict case_two() {
  const RunResult r = run_scenario(generate_su_case(SuCase::Case2, kSeed, kMeasurements), PipelineConfig{});
  std::size_t sent = 0, wild = 0, correct = 0;
  for (const auto& rec : r.records) {
    if (!rec.outcome.sent) continue;
    ++sent;
    wild += rec.outcome.approach == Approach::WildSearch;
    correct += rec.correct;
  }
  const double success = sent ? static_cast<double>(correct) / static_cast<double>(sent) : 0.0;
  return {sent > 0 && wild == sent && success >= 0.9,
          fmt("%zu measurements, %zu sent, %zu via wild search, %zu correct (%.4f)", r.metrics.total_measurements, sent,
              wild, correct, success)};
}

double false_send_rate(const Metrics& m) { return m.task_sent_rate.value_or(0.0); }

Verdict case_three(SuCase kind, bool sweep) {
  const Scenario s = generate_su_case(kind, kSeed, kMeasurements);
  PipelineConfig cfg;
  const RunResult base = run_scenario(s, cfg);
  const double rate = false_send_rate(base.metrics);
  std::string detail = fmt("%zu measurements, %zu false sends, rate %.4f at min_matches %d", base.metrics.total_measurements,
                           base.metrics.messages_sent, rate, cfg.min_matches);
  bool ok = rate <= 0.10;
  if (sweep) {
    double prev = 2.0;
    bool monotone = true;
    detail += "; sweep";
    for (int t : {1, 2, 3, 5, 8, 12}) {
      cfg.min_matches = t;
      const double r = t == 5 ? rate : false_send_rate(run_scenario(s, cfg).metrics);
      monotone = monotone && r <= prev;
      prev = r;
      detail += fmt(" %d:%.3f", t, r);
    }
    detail += monotone ? " (non-increasing)" : " (NOT monotone)";
    ok = ok && monotone;
  }
  return {ok, detail};
}

// ---- 9 ----

Verdict orb_cap() {
  TempDir dir("acc_orb");
  generate_corpus(dir.path(), 1);
  save_scenario(generate_su_case(SuCase::Case1, 1, 2), dir / "scenario");
  std::size_t images = 0, worst = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path())) {
    if (e.path().extension() != ".png" || e.path().parent_path().filename() == "depth") continue;
    worst = std::max(worst, detect_orb(load_gray(e.path())).size());
    ++images;
  }
  return {images > 0 && worst <= 500, fmt("%zu images, most keypoints %zu", images, worst)};
}

// ---- 10 ----

Verdict bench_schema() {
  TempDir dir("acc_bench");
  if (cli("gen corpus --seed 1 " + q(dir / "corpus")) != 0) return {false, "gen corpus failed"};
  if (cli("bench " + q(dir / "corpus") + " --out " + q(dir / "out")) != 0) return {false, "bench failed"};
  std::ifstream in(dir / "out" / "bench.csv");
  std::string header;
  std::getline(in, header);
  const std::string want =
      "Algorithm,Total computation time (sec) mean,Total computation time (sec) SD,"
      "Computation time/feature matched (ms) mean,Computation time/feature matched (ms) SD,"
      "Features matched mean,Features matched SD";
  std::vector<std::string> labels;
  bool numeric = true;
  for (std::string line; std::getline(in, line);) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    labels.push_back(cell);
    int cells = 0;
    while (std::getline(ss, cell, ',')) {
      ++cells;
      char* end = nullptr;
      std::strtod(cell.c_str(), &end);
      numeric = numeric && end && *end == '\0' && !cell.empty();
    }
    numeric = numeric && cells == 6;
  }
  const std::vector<std::string> expect = {"BF-AKAZE", "BF-ORB", "FLANN-AKAZE", "FLANN-ORB"};
  return {header == want && labels == expect && numeric,
          fmt("header %s, rows %zu, all cells numeric: %s", header == want ? "exact" : "WRONG", labels.size(),
              numeric ? "yes" : "no")};
}

// ---- 11 ----

/// Output files with every wall-clock field removed.
std::map<std::string, std::string> masked_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  auto metrics = nlohmann::ordered_json::parse(slurp(dir / "metrics.json"));
  metrics.erase("timing");
  out["metrics.json"] = metrics.dump();
  std::string csv;
  std::ifstream in(dir / "metrics.csv");
  for (std::string line; std::getline(in, line);) {
    for (int i = 0; i < 2; ++i) line = line.substr(0, line.rfind(','));  // two timing columns
    csv += line + '\n';
  }
  out["metrics.csv"] = csv;
  std::string log;
  std::ifstream jl(dir / "outcomes.jsonl");
  for (std::string line; std::getline(jl, line);) {
    auto j = nlohmann::ordered_json::parse(line);
    j.erase("elapsed_ms");
    log += j.dump() + '\n';
  }
  out["outcomes.jsonl"] = log;
  return out;
}

Verdict determinism() {
  TempDir dir("acc_det");
  std::vector<std::map<std::string, std::string>> scenes, outputs;
  for (const char* run : {"a", "b"}) {
    const fs::path scn = dir / run, out = dir / (std::string(run) + "_out");
    if (cli("gen case1 --seed 11 --measurements 20 " + q(scn)) != 0) return {false, "gen failed"};
    if (cli("run " + q(scn) + " --out " + q(out)) != 0) return {false, "run failed"};
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(scn)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), scn).string()] = slurp(e.path());
    }
    scenes.push_back(std::move(files));
    outputs.push_back(masked_outputs(out));
  }
  const bool same_scene = scenes[0] == scenes[1], same_out = outputs[0] == outputs[1];
  return {same_scene && same_out, fmt("%zu scenario files %s, run outputs %s", scenes[0].size(),
                                      same_scene ? "identical" : "DIFFER", same_out ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; none runs them all.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric definitions", metric_definitions},
      {2, "brute-force matcher equals exhaustive oracle", bruteforce_oracle},
      {3, "approximate matcher recall", approximate_recall},
      {4, "ratio-test subset and monotonicity", ratio_properties},
      {5, "geometry round trip and cloud oracle", geometry},
      {6, "case 1: labelled objects", case_one},
      {7, "case 2: unresolvable categories", case_two},
      {8, "case 3: disjoint scenes", [] { return case_three(SuCase::Case3Disjoint, true); }},
      {9, "ORB keypoint cap", orb_cap},
      {10, "benchmark schema", bench_schema},
      {11, "determinism", determinism},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  // The joint variant carries pictograms on the robot side; it is reported, not gated.
  if (only.empty() || only.count(8)) try {
    const Verdict joint = case_three(SuCase::Case3Joint, false);
    std::printf("INFO  8 case 3 joint variant: %s\n", joint.detail.c_str());
  } catch (const std::exception& e) {
    std::printf("INFO  8 case 3 joint variant: exception: %s\n", e.what());
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
