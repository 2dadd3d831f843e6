#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyectl/config.hpp"
#include "eyectl/features.hpp"
#include "eyectl/matching.hpp"
#include "eyectl/metrics.hpp"
#include "eyectl/scenario.hpp"

namespace eyectl {

struct RunResult {
  Metrics metrics;
  std::vector<MeasurementRecord> records;  // after duplicate removal
  /// One outcome-log line per record, aligned with `records`.
  std::vector<nlohmann::ordered_json> log;
};

/// Replays gaze -> fixation -> pictogram selection -> fallback_select for every message.
/// A message is correct when it was sent and its target overlaps the scripted target box with
/// IoU >= 0.5. Throws ScenarioError when a message falls outside every scripted window.
RunResult run_scenario(const Scenario& s, const PipelineConfig& cfg);

/// Writes metrics.json, metrics.csv and outcomes.jsonl into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const std::string& name, const RunResult& r);

struct BenchRow {
  DetectorKind detector = DetectorKind::AKAZE;
  MatcherKind matcher = MatcherKind::BruteForce;
  std::size_t items = 0;
  double total_s_mean = 0.0, total_s_sd = 0.0;
  /// Empty when no item produced a match.
  std::optional<double> ms_per_match_mean, ms_per_match_sd;
  double matches_mean = 0.0, matches_sd = 0.0;
};

/// Label in matcher-detector form, e.g. "FLANN-AKAZE".
std::string bench_label(DetectorKind d, MatcherKind m);

/// Times detection on both images plus matching for every corpus pair and every
/// detector x matcher combination; each item's time is the median of `repetitions` runs.
/// Pairs come from pairs.csv (`query,train`); without it every image is matched to itself.
/// Throws CorpusError when the corpus holds no readable image.
std::vector<BenchRow> bench_detectors(const std::filesystem::path& corpus, const PipelineConfig& cfg,
                                      int repetitions = 3);
void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);

/// Side-by-side composite: `a` on the left, `b` on the right, one line per match and the
/// match count printed in the top-left corner.
ColorImage render_matches(const GrayImage& a, std::span<const Keypoint> ka, const GrayImage& b,
                          std::span<const Keypoint> kb, std::span<const MatchPair> matches);

}  // namespace eyectl
