#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/common.hpp"
#include "bugtriage/corpus.hpp"

namespace bugtriage::profiles {

inline constexpr int kDefaultWindowDays = 90;

struct BugEntry {
  std::string id;
  Timestamp created_time{};
  corpus::Combination combination;
  int priority = corpus::kDefaultPriority;
  int severity = corpus::kDefaultSeverity;
  double weight = 1.0;
};

struct DeveloperProfile {
  std::string name;
  std::vector<BugEntry> bug_list;  // in the order reports were added
  std::size_t amount_of_bugs = 0;
  corpus::Combination top_bug;
  std::map<std::string, std::size_t> per_combination_counts;  // keyed by Combination::key()
  std::array<std::size_t, corpus::kPriorityLevels> priority_histogram{};
  std::array<std::size_t, corpus::kSeverityLevels> severity_histogram{};
  std::optional<Timestamp> first_active;
  std::optional<Timestamp> last_active;
  std::map<std::string, std::size_t> monthly_activity;  // "YYYY-MM"

  /// Folds one fixed report into every aggregate.
  void add(const corpus::BugReport& report, double weight = 1.0);
  void add(const BugEntry& entry);

  friend bool operator==(const DeveloperProfile& a, const DeveloperProfile& b);
};

using ProfileMap = std::map<std::string, DeveloperProfile>;

/// One profile per distinct assignee.
ProfileMap build_profiles(std::span<const corpus::BugReport> reports);

/// Field-wise merge; bug lists are concatenated (a first).
ProfileMap merge_profiles(const ProfileMap& a, const ProfileMap& b);

/// Map keys, descending by amount_of_bugs, ties by key.
std::vector<std::string> rank_developers(const ProfileMap& profiles);

/// True iff some bug was created on a day in [date - window_days, date] and
/// not after `date` itself.
bool is_active(const DeveloperProfile& profile, Timestamp date, int window_days = kDefaultWindowDays);

/// Latest bug creation time not after `date`.
std::optional<Timestamp> last_active_before(const DeveloperProfile& profile, Timestamp date);

/// Bugs at least as urgent as the query in priority or in severity (lower
/// rank is more urgent).
std::size_t experience(const DeveloperProfile& profile, int priority, int severity);

nlohmann::json to_json(const DeveloperProfile& profile);
DeveloperProfile profile_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProfileMap& profiles);
ProfileMap profiles_from_json(const nlohmann::json& j);

}  // namespace bugtriage::profiles
