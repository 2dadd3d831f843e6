#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "eyectl/core.hpp"
#include "eyectl/image.hpp"
#include "eyectl/scenario.hpp"

namespace eyectl {

enum class SuCase { Case1, Case2, Case3Joint, Case3Disjoint };

std::string_view to_string(SuCase kind);
/// Accepts case1, case2, case3-joint and case3-disjoint; throws ConfigError otherwise.
SuCase parse_su_case(std::string_view text);

/// Task pictogram: black design on white inside a black frame, `size` pixels square.
GrayImage draw_glyph(TaskId task, int size);

/// Seconds between consecutive scripted selections.
inline constexpr double kMeasurementPeriod = 1.3;
/// Part of each period spent fixating the pictogram.
inline constexpr double kDwellSeconds = 0.65;

/// Deterministic user/robot recording for one evaluation case:
/// - Case1: cup, fork and bottle carry the Drink, Place and Pick pictograms; both cameras see
///   the same table.
/// - Case2: every object carries the Place pictogram and the robot-side detector reports
///   categories no task accepts, so only the wild search can answer.
/// - Case3Joint / Case3Disjoint: the robot faces a different table with other objects of the
///   same classes, with or without pictograms on them. No robot-side object is correct.
/// Case1 also carries a depth stream and a camera rig.
Scenario generate_su_case(SuCase kind, std::uint64_t seed, int measurements = 100);

/// Benchmark corpus: object cutouts from the user camera and full robot frames for a bright
/// and a dim table, plus pairs.csv (`query,train`).
void generate_corpus(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace eyectl
