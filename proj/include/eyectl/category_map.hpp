#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "eyectl/core.hpp"

namespace eyectl {

/// Task -> object-category library. Text form, one task per line:
///
///     Drink: 46,47
///     FillCup: 44,46,47 secondary
///
/// `#` starts a comment. Every task must appear exactly once with a non-empty id list,
/// and FillCup must carry the `secondary` flag.
class CategoryMap {
 public:
  struct Entry {
    std::set<int> objects;
    bool needs_secondary = false;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  /// Categories named in the evaluation (cup, bottle, fork, glass) plus COCO staples.
  static CategoryMap defaults();
  static CategoryMap parse(std::string_view text);
  static CategoryMap load(const std::filesystem::path& path);

  /// Canonical text: tasks in enum order, ids ascending, no comments.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  bool contains(TaskId task) const { return entries_.count(task) != 0; }
  const Entry& entry(TaskId task) const;
  bool needs_secondary(TaskId task) const { return entry(task).needs_secondary; }
  const std::map<TaskId, Entry>& entries() const { return entries_; }

  /// Replaces one task's entry; used to build scenario-specific libraries.
  void set(TaskId task, Entry entry);

  friend bool operator==(const CategoryMap&, const CategoryMap&) = default;

 private:
  std::map<TaskId, Entry> entries_;
};

/// Object categories that can serve the task. Throws UnknownTask when the task is absent.
const std::set<int>& resolve_task(TaskId task, const CategoryMap& map);

}  // namespace eyectl
