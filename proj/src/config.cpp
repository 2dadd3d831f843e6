#include "eyectl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eyectl/error.hpp"

namespace eyectl {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

double to_double(std::string_view key, std::string_view value, int line) {
  // from_chars for double is available in libstdc++ 11
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), line, "not a number: '" + std::string(value) + "'");
  }
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value, int line) {
  Int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key), line, "not an integer: '" + std::string(value) + "'");
  }
  return out;
}

void check_field(const PipelineConfig& cfg, std::string_view key, int line) {
  auto fail = [&](const std::string& why) { throw ConfigError(std::string(key), line, why); };
  if (key == "ratio" && !(cfg.ratio > 0.0 && cfg.ratio <= 1.0)) fail("must be in (0, 1]");
  if (key == "min_matches" && cfg.min_matches < 1) fail("must be >= 1");
  if (key == "cutout_scale" && !(cfg.cutout_scale >= 1.0)) fail("must be >= 1");
  if (key == "dispersion_px" && !(cfg.dwell.dispersion_px > 0.0)) fail("must be > 0");
  if (key == "min_duration_ms" && !(cfg.dwell.min_duration_ms > 0.0)) fail("must be > 0");
}

constexpr std::string_view kNumericKeys[] = {"ratio", "min_matches", "cutout_scale", "dispersion_px",
                                             "min_duration_ms"};

}  // namespace

std::string_view to_string(DetectorKind kind) { return kind == DetectorKind::ORB ? "ORB" : "AKAZE"; }
std::string_view to_string(MatcherKind kind) { return kind == MatcherKind::BruteForce ? "BF" : "FLANN"; }

DetectorKind parse_detector(std::string_view text) {
  const auto v = lower(trim(text));
  if (v == "orb") return DetectorKind::ORB;
  if (v == "akaze") return DetectorKind::AKAZE;
  throw ConfigError("detector", 0, "expected orb|akaze, got '" + std::string(text) + "'");
}

MatcherKind parse_matcher(std::string_view text) {
  const auto v = lower(trim(text));
  if (v == "bf" || v == "bruteforce") return MatcherKind::BruteForce;
  if (v == "approx" || v == "approximate" || v == "flann") return MatcherKind::Approximate;
  throw ConfigError("matcher", 0, "expected bf|approx, got '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  for (auto key : kNumericKeys) check_field(*this, key, 0);
}

void apply_setting(PipelineConfig& cfg, std::string_view raw_key, std::string_view raw_value, int line) {
  std::string key(trim(raw_key));
  std::replace(key.begin(), key.end(), '-', '_');
  const auto value = trim(raw_value);
  if (value.empty()) throw ConfigError(key, line, "missing value");

  if (key == "ratio") {
    cfg.ratio = to_double(key, value, line);
  } else if (key == "min_matches") {
    cfg.min_matches = to_int<int>(key, value, line);
  } else if (key == "cutout_scale") {
    cfg.cutout_scale = to_double(key, value, line);
  } else if (key == "dispersion_px") {
    cfg.dwell.dispersion_px = to_double(key, value, line);
  } else if (key == "min_duration_ms") {
    cfg.dwell.min_duration_ms = to_double(key, value, line);
  } else if (key == "detector") {
    try {
      cfg.detector = parse_detector(value);
    } catch (const ConfigError& e) {
      throw ConfigError(key, line, e.what());
    }
  } else if (key == "matcher") {
    try {
      cfg.matcher = parse_matcher(value);
    } catch (const ConfigError& e) {
      throw ConfigError(key, line, e.what());
    }
  } else if (key == "seed") {
    cfg.seed = to_int<std::uint64_t>(key, value, line);
  } else {
    throw ConfigError(key, line, "unknown key");
  }
  check_field(cfg, key, line);
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(std::string(line), line_no, "expected key = value");
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1), line_no);
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace eyectl
