#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace eyectl {

enum class DetectorKind { ORB, AKAZE };
enum class MatcherKind { BruteForce, Approximate };

std::string_view to_string(DetectorKind kind);
std::string_view to_string(MatcherKind kind);
/// Accepts "orb"/"akaze" and "bf"/"approx" (case-insensitive); throws ConfigError otherwise.
DetectorKind parse_detector(std::string_view text);
MatcherKind parse_matcher(std::string_view text);

struct DwellParams {
  double dispersion_px = 25.0;   // at 1280x720
  double min_duration_ms = 300.0;
};

struct PipelineConfig {
  double ratio = 0.75;
  int min_matches = 5;
  double cutout_scale = 4.0;
  DwellParams dwell;
  DetectorKind detector = DetectorKind::AKAZE;
  MatcherKind matcher = MatcherKind::Approximate;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
};

/// Sets one field by its key (`ratio`, `min_matches`, `cutout_scale`, `dispersion_px`,
/// `min_duration_ms`, `detector`, `matcher`, `seed`). Hyphens in keys are accepted as
/// underscores so CLI flag names map onto the same vocabulary.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value, int line = 0);

/// Flat `key = value` text with `#` comments; omitted keys keep their defaults.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace eyectl
