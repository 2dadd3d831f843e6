#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "eyectl/core.hpp"
#include "eyectl/transfer.hpp"

namespace eyectl {

/// One message from the gaze side and what the robot side made of it.
struct MeasurementRecord {
  int measurement = -1;  // scripted selection this message answers
  std::int64_t frame = 0;
  double t = 0.0;        // message time, seconds
  TaskId task = TaskId::Drink;
  BoundingBox pictogram;
  int object_category = -1;  // true class of the gazed object
  SelectionOutcome outcome;
  bool correct = false;
  double elapsed_ms = 0.0;
};

struct Metrics {
  std::size_t total_measurements = 0;
  std::size_t messages_sent = 0;
  std::size_t correct_sent = 0;
  /// Empty when there is nothing to divide by.
  std::optional<double> task_sent_rate;
  std::optional<double> task_selection_success_rate;
  std::map<std::string, std::size_t> per_object_correct;
  std::map<std::string, std::size_t> approach_counts;
  double mean_selection_time_ms = 0.0;
  double sd_selection_time_ms = 0.0;  // sample standard deviation
  std::size_t duplicates_removed = 0;
  std::size_t missed_selections = 0;  // scripted selections that produced no message
};

/// Drops a record when the last kept record has the same task, an overlapping pictogram box
/// (IoU >= 0.5) and lies at most `window_s` earlier. Comparing against kept records, not raw
/// neighbours, makes a second pass a no-op.
std::vector<MeasurementRecord> remove_duplicates(std::span<const MeasurementRecord> records, double window_s);

/// Pure reduction over deduplicated records.
Metrics compute_metrics(std::span<const MeasurementRecord> records);

/// `timing` holds every wall-clock field so equality checks can drop a single key.
nlohmann::ordered_json metrics_json(const std::string& name, const Metrics& m);
void write_metrics_json(const std::filesystem::path& path, const std::string& name, const Metrics& m);

/// Summary table, one row per scenario. Undefined rates are written as NA.
void write_metrics_csv(const std::filesystem::path& path, std::span<const std::pair<std::string, Metrics>> rows);

}  // namespace eyectl
