#include "bugtriage/profiles.hpp"

#include <algorithm>

namespace bugtriage::profiles {

namespace {

void refresh_top_bug(DeveloperProfile& p, const std::string& touched_key, const corpus::Combination& touched) {
  const std::size_t n = p.per_combination_counts.at(touched_key);
  const std::string current = p.top_bug.key();
  const auto it = p.per_combination_counts.find(current);
  const std::size_t best = (p.amount_of_bugs > 1 && it != p.per_combination_counts.end()) ? it->second : 0;
  if (best == 0 || n > best || (n == best && touched_key < current)) p.top_bug = touched;
}

std::optional<Timestamp> opt_time(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  auto t = parse_timestamp(j.get<std::string>());
  if (!t) throw DataError("profile: bad timestamp");
  return t;
}

nlohmann::json time_json(const std::optional<Timestamp>& t) {
  return t ? nlohmann::json(format_timestamp(*t)) : nlohmann::json(nullptr);
}

}  // namespace

void DeveloperProfile::add(const corpus::BugReport& r, double weight) {
  add(BugEntry{r.id, r.created_time, r.combination(), r.priority, r.severity, weight});
}

void DeveloperProfile::add(const BugEntry& e) {
  if (e.priority < 1 || e.priority > corpus::kPriorityLevels) throw ArgumentError("profile: priority rank out of range");
  if (e.severity < 1 || e.severity > corpus::kSeverityLevels) throw ArgumentError("profile: severity rank out of range");
  bug_list.push_back(e);
  ++amount_of_bugs;
  const std::string key = e.combination.key();
  ++per_combination_counts[key];
  refresh_top_bug(*this, key, e.combination);
  ++priority_histogram[static_cast<std::size_t>(e.priority - 1)];
  ++severity_histogram[static_cast<std::size_t>(e.severity - 1)];
  if (!first_active || e.created_time < *first_active) first_active = e.created_time;
  if (!last_active || e.created_time > *last_active) last_active = e.created_time;
  ++monthly_activity[format_month(e.created_time)];
}

bool operator==(const DeveloperProfile& a, const DeveloperProfile& b) {
  return a.name == b.name && a.amount_of_bugs == b.amount_of_bugs && a.top_bug.key() == b.top_bug.key() &&
         a.per_combination_counts == b.per_combination_counts && a.priority_histogram == b.priority_histogram &&
         a.severity_histogram == b.severity_histogram && a.first_active == b.first_active &&
         a.last_active == b.last_active && a.monthly_activity == b.monthly_activity &&
         std::equal(a.bug_list.begin(), a.bug_list.end(), b.bug_list.begin(), b.bug_list.end(),
                    [](const BugEntry& x, const BugEntry& y) {
                      return x.id == y.id && x.created_time == y.created_time && x.combination == y.combination &&
                             x.priority == y.priority && x.severity == y.severity && x.weight == y.weight;
                    });
}

ProfileMap build_profiles(std::span<const corpus::BugReport> reports) {
  ProfileMap out;
  for (const auto& r : reports) {
    auto& p = out[r.assignee];
    p.name = r.assignee;
    p.add(r);
  }
  return out;
}

ProfileMap merge_profiles(const ProfileMap& a, const ProfileMap& b) {
  ProfileMap out = a;
  for (const auto& [name, prof] : b) {
    auto& p = out[name];
    p.name = name;
    for (const auto& e : prof.bug_list) p.add(e);
  }
  return out;
}

std::vector<std::string> rank_developers(const ProfileMap& profiles) {
  std::vector<std::pair<std::string, std::size_t>> ps;
  ps.reserve(profiles.size());
  for (const auto& [name, p] : profiles) ps.emplace_back(name, p.amount_of_bugs);
  std::sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  out.reserve(ps.size());
  for (auto& p : ps) out.push_back(std::move(p.first));
  return out;
}

bool is_active(const DeveloperProfile& profile, Timestamp date, int window_days) {
  if (window_days < 0) throw ArgumentError("is_active: negative window");
  if (!profile.first_active || date < *profile.first_active) return false;
  const std::int64_t hi = day_number(date);
  const std::int64_t lo = hi - window_days;
  return std::any_of(profile.bug_list.begin(), profile.bug_list.end(), [&](const BugEntry& e) {
    return e.created_time <= date && day_number(e.created_time) >= lo;
  });
}

std::optional<Timestamp> last_active_before(const DeveloperProfile& profile, Timestamp date) {
  std::optional<Timestamp> best;
  for (const auto& e : profile.bug_list) {
    if (e.created_time <= date && (!best || e.created_time > *best)) best = e.created_time;
  }
  return best;
}

std::size_t experience(const DeveloperProfile& profile, int priority, int severity) {
  return static_cast<std::size_t>(std::count_if(profile.bug_list.begin(), profile.bug_list.end(), [&](const BugEntry& e) {
    return e.priority <= priority || e.severity <= severity;
  }));
}

nlohmann::json to_json(const DeveloperProfile& p) {
  nlohmann::json bugs = nlohmann::json::array();
  for (const auto& e : p.bug_list) {
    bugs.push_back({{"id", e.id},
                    {"created_time", format_timestamp(e.created_time)},
                    {"combination", {{"product", e.combination.product}, {"component", e.combination.component}}},
                    {"priority", e.priority},
                    {"severity", e.severity},
                    {"weight", e.weight}});
  }
  return {{"name", p.name},
          {"bug_list", bugs},
          {"amount_of_bugs", p.amount_of_bugs},
          {"top_bug", {{"product", p.top_bug.product}, {"component", p.top_bug.component}}},
          {"per_combination_counts", p.per_combination_counts},
          {"priority_histogram", p.priority_histogram},
          {"severity_histogram", p.severity_histogram},
          {"first_active", time_json(p.first_active)},
          {"last_active", time_json(p.last_active)},
          {"monthly_activity", p.monthly_activity}};
}

DeveloperProfile profile_from_json(const nlohmann::json& j) {
  // Aggregates are rebuilt from the bug list and then checked against the file.
  DeveloperProfile p;
  try {
    p.name = j.at("name").get<std::string>();
    for (const auto& b : j.at("bug_list")) {
      BugEntry e;
      e.id = b.at("id").get<std::string>();
      auto t = parse_timestamp(b.at("created_time").get<std::string>());
      if (!t) throw DataError("profile: bad timestamp in bug list");
      e.created_time = *t;
      e.combination = {b.at("combination").at("product").get<std::string>(),
                       b.at("combination").at("component").get<std::string>()};
      e.priority = b.at("priority").get<int>();
      e.severity = b.at("severity").get<int>();
      e.weight = b.value("weight", 1.0);
      p.add(e);
    }
    if (p.amount_of_bugs != j.at("amount_of_bugs").get<std::size_t>() ||
        opt_time(j.at("last_active")) != p.last_active) {
      throw DataError("profile for " + p.name + ": aggregates disagree with bug list");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("profile: ") + e.what());
  }
  return p;
}

nlohmann::json to_json(const ProfileMap& profiles) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [_, p] : profiles) out.push_back(to_json(p));
  return out;
}

ProfileMap profiles_from_json(const nlohmann::json& j) {
  ProfileMap out;
  for (const auto& pj : j) {
    auto p = profile_from_json(pj);
    auto name = p.name;
    out.emplace(std::move(name), std::move(p));
  }
  return out;
}

}  // namespace bugtriage::profiles
