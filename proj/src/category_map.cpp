#include "eyectl/category_map.hpp"

#include <cctype>
#include <charconv>
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

int parse_id(std::string_view token, std::string_view label, int line) {
  token = trim(token);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    throw ConfigError(std::string(label), line, "bad category id '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

CategoryMap CategoryMap::defaults() {
  using namespace category;
  CategoryMap map;
  const std::set<int> tableware = {kBottle, kWineGlass, kCup, kFork, kKnife, kSpoon};
  map.entries_[TaskId::Drink] = {{kCup, kWineGlass}, false};
  map.entries_[TaskId::FillCup] = {{kBottle, kWineGlass, kCup}, true};
  map.entries_[TaskId::Eat] = {{kFork, kSpoon, kBowl}, false};
  map.entries_[TaskId::Scratch] = {{kBackScratcher}, false};
  map.entries_[TaskId::SwitchLightSwitch] = {{kLightSwitch}, false};
  map.entries_[TaskId::Brush] = {{kToothbrush}, false};
  map.entries_[TaskId::PickObject] = {tableware, false};
  map.entries_[TaskId::PlaceObject] = {tableware, false};
  return map;
}

CategoryMap CategoryMap::parse(std::string_view text) {
  CategoryMap map;
  std::map<TaskId, int> seen_at;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ConfigError("category_map", line_no, "expected 'task: ids'");
    const auto label = trim(line.substr(0, colon));
    const auto task = task_from_label(label);
    if (!task) throw ConfigError(std::string(label), line_no, "unknown task label");
    if (auto it = seen_at.find(*task); it != seen_at.end()) {
      throw ConfigError(std::string(label), line_no,
                        "task listed twice (first at line " + std::to_string(it->second) + ")");
    }
    seen_at[*task] = line_no;

    auto rest = trim(line.substr(colon + 1));
    Entry entry;
    // Optional trailing flag: a word after the id list, separated by whitespace.
    if (const auto space = rest.find_last_of(" \t,"); space != std::string_view::npos && rest[space] != ',' &&
        std::isalpha(static_cast<unsigned char>(rest[space + 1]))) {
      const auto flag = trim(rest.substr(space + 1));
      if (flag != "secondary") throw ConfigError(std::string(label), line_no, "unknown flag '" + std::string(flag) + "'");
      entry.needs_secondary = true;
      rest = trim(rest.substr(0, space));
    }
    std::size_t start = 0;
    while (start <= rest.size()) {
      const auto comma = rest.find(',', start);
      const auto token = rest.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      entry.objects.insert(parse_id(token, label, line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (*task == TaskId::FillCup && !entry.needs_secondary) {
      throw ConfigError(std::string(label), line_no, "FillCup requires the 'secondary' flag");
    }
    map.entries_[*task] = std::move(entry);
  }
  for (TaskId task : kAllTasks) {
    if (!map.contains(task)) throw ConfigError(std::string(task_label(task)), 0, "task missing from category map");
  }
  return map;
}

CategoryMap CategoryMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open category map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string CategoryMap::serialize() const {
  std::string out;
  for (const auto& [task, entry] : entries_) {
    out += task_label(task);
    out += ": ";
    bool first = true;
    for (int id : entry.objects) {
      if (!first) out += ',';
      out += std::to_string(id);
      first = false;
    }
    if (entry.needs_secondary) out += " secondary";
    out += '\n';
  }
  return out;
}

void CategoryMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write category map " + path.string());
  out << serialize();
}

const CategoryMap::Entry& CategoryMap::entry(TaskId task) const {
  const auto it = entries_.find(task);
  if (it == entries_.end()) {
    throw UnknownTask("task id " + std::to_string(static_cast<int>(task)) + " not in category map");
  }
  return it->second;
}

void CategoryMap::set(TaskId task, Entry entry) {
  if (entry.objects.empty()) throw ConfigError(std::string(task_label(task)), 0, "empty object set");
  entries_[task] = std::move(entry);
}

const std::set<int>& resolve_task(TaskId task, const CategoryMap& map) { return map.entry(task).objects; }

}  // namespace eyectl
