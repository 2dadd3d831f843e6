#include "eyectl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "eyectl/error.hpp"

namespace eyectl {

std::vector<MeasurementRecord> remove_duplicates(std::span<const MeasurementRecord> records, double window_s) {
  std::vector<MeasurementRecord> out;
  for (const auto& cur : records) {
    if (!out.empty()) {
      const auto& prev = out.back();
      if (prev.task == cur.task && iou(prev.pictogram, cur.pictogram) >= 0.5 && cur.t - prev.t <= window_s) continue;
    }
    out.push_back(cur);
  }
  return out;
}

Metrics compute_metrics(std::span<const MeasurementRecord> records) {
  Metrics m;
  m.total_measurements = records.size();
  double sum = 0.0;
  for (const auto& r : records) {
    m.per_object_correct.try_emplace(category_name(r.object_category), 0);
    ++m.approach_counts[std::string(to_string(r.outcome.approach))];
    sum += r.elapsed_ms;
    if (!r.outcome.sent) continue;
    ++m.messages_sent;
    if (r.correct) {
      ++m.correct_sent;
      ++m.per_object_correct[category_name(r.object_category)];
    }
  }
  if (m.total_measurements > 0) {
    m.task_sent_rate = static_cast<double>(m.messages_sent) / static_cast<double>(m.total_measurements);
    m.mean_selection_time_ms = sum / static_cast<double>(m.total_measurements);
  }
  if (m.messages_sent > 0) {
    m.task_selection_success_rate = static_cast<double>(m.correct_sent) / static_cast<double>(m.messages_sent);
  }
  if (records.size() > 1) {
    double ss = 0.0;
    for (const auto& r : records) ss += (r.elapsed_ms - m.mean_selection_time_ms) * (r.elapsed_ms - m.mean_selection_time_ms);
    m.sd_selection_time_ms = std::sqrt(ss / static_cast<double>(records.size() - 1));
  }
  return m;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

nlohmann::ordered_json metrics_json(const std::string& name, const Metrics& m) {
  nlohmann::ordered_json j;
  j["scenario"] = name;
  j["total_measurements"] = m.total_measurements;
  j["messages_sent"] = m.messages_sent;
  j["correct_sent"] = m.correct_sent;
  j["task_sent_rate"] = optional_json(m.task_sent_rate);
  j["task_selection_success_rate"] = optional_json(m.task_selection_success_rate);
  j["per_object_correct"] = m.per_object_correct;
  j["approach_counts"] = m.approach_counts;
  j["duplicates_removed"] = m.duplicates_removed;
  j["missed_selections"] = m.missed_selections;
  j["timing"] = {{"mean_selection_time_ms", m.mean_selection_time_ms}, {"sd_selection_time_ms", m.sd_selection_time_ms}};
  return j;
}

void write_metrics_json(const std::filesystem::path& path, const std::string& name, const Metrics& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << metrics_json(name, m).dump(2) << '\n';
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const std::pair<std::string, Metrics>> rows) {
  std::set<std::string> objects;
  for (const auto& [name, m] : rows)
    for (const auto& [obj, n] : m.per_object_correct) objects.insert(obj);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "Test case,Total meas.,Messages sent,Task sent rate,Task selection success rate";
  for (const auto& o : objects) out << ",Correct " << o;
  out << ",Mean selection time (ms),SD selection time (ms)\n";
  for (const auto& [name, m] : rows) {
    out << name << ',' << m.total_measurements << ',' << m.messages_sent << ','
        << (m.task_sent_rate ? fmt(*m.task_sent_rate, 4) : "NA") << ','
        << (m.task_selection_success_rate ? fmt(*m.task_selection_success_rate, 4) : "NA");
    for (const auto& o : objects) {
      auto it = m.per_object_correct.find(o);
      out << ',' << (it == m.per_object_correct.end() ? 0 : it->second);
    }
    out << ',' << fmt(m.mean_selection_time_ms, 1) << ',' << fmt(m.sd_selection_time_ms, 1) << '\n';
  }
}

}  // namespace eyectl
