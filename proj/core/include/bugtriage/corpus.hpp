#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/common.hpp"

namespace bugtriage::corpus {

inline constexpr int kPriorityLevels = 5;
inline constexpr int kSeverityLevels = 7;
inline constexpr int kDefaultPriority = 3;  // P3
inline constexpr int kDefaultSeverity = 4;  // normal
inline constexpr std::string_view kUnassigned = "unassigned";

/// A (product, component) feature category. Equality is case-insensitive.
struct Combination {
  std::string product;
  std::string component;

  /// Lowercased "product/component"; the identity used for equality,
  /// ordering and map keys.
  std::string key() const;

  friend bool operator==(const Combination& a, const Combination& b) { return a.key() == b.key(); }
  friend bool operator<(const Combination& a, const Combination& b) { return a.key() < b.key(); }
};

struct BugReport {
  std::string id;
  std::string product;
  std::string component;
  std::string title;
  std::string description;
  std::vector<std::string> comments;
  int priority = kDefaultPriority;  // 1 (P1, most urgent) .. 5
  int severity = kDefaultSeverity;  // 1 (blocker) .. 7 (enhancement)
  std::string status;
  std::string resolution;
  std::string assignee{kUnassigned};
  Timestamp created_time{};
  std::optional<Timestamp> resolved_time;

  Combination combination() const { return {product, component}; }

  /// Modeling text: title, description and comments, space-joined.
  std::string text() const;
};

/// Maps bugtracker labels onto ranks. Empty and "--" map to the defaults;
/// unknown labels yield nullopt.
std::optional<int> priority_rank(std::string_view label);
std::optional<int> severity_rank(std::string_view label);
std::string priority_label(int rank);
std::string severity_label(int rank);

/// Canonical field name -> CSV column header.
struct ColumnMap {
  std::map<std::string, std::string> columns;

  static ColumnMap defaults();
  static const std::vector<std::string>& canonical_fields();
};

struct Reject {
  std::size_t row = 0;  // 1-based data record number (header excluded)
  std::string reason;
};

struct ParseResult {
  std::vector<BugReport> reports;
  std::vector<Reject> rejects;
};

/// Throws DataError when the file cannot be read or the header lacks a
/// required column (id, title, created_time).
ParseResult parse_csv(const std::filesystem::path& path,
                      const ColumnMap& column_map = ColumnMap::defaults());
ParseResult parse_csv_text(std::string_view text,
                           const ColumnMap& column_map = ColumnMap::defaults());

/// Writes reports in the canonical schema; parse_csv_text reads it back
/// unchanged.
void write_csv(std::ostream& out, std::span<const BugReport> reports);
void write_rejects_csv(std::ostream& out, std::span<const Reject> rejects);

struct FilterConfig {
  std::size_t min_fixed = 100;
  std::vector<std::string> name_blacklist{"nobody", "unassigned", "inbox", "", "triaged"};
  std::string required_resolution = "FIXED";

  void validate() const;
};

/// Empty patterns match only the empty name; other patterns match as
/// case-insensitive substrings ("inbox" catches "platform-ui-inbox@eclipse.org").
bool is_generic_assignee(std::string_view assignee, const FilterConfig& cfg);

struct CorpusStats {
  std::optional<std::pair<Timestamp, Timestamp>> period;
  std::size_t amount = 0;
  std::size_t products = 0;
  std::size_t components = 0;
  std::size_t combinations = 0;
  std::size_t developers = 0;
  std::size_t final_amount = 0;
  std::size_t final_developers = 0;
};

nlohmann::json to_json(const CorpusStats& stats);

struct FilterResult {
  std::vector<BugReport> kept;
  CorpusStats stats;
};

FilterResult filter_corpus(std::span<const BugReport> reports, const FilterConfig& cfg);

struct Split {
  std::vector<BugReport> train;
  std::vector<BugReport> test;
};

/// Sorts by (created_time, id) and puts the first ceil(ratio * n) reports in
/// train. Throws ArgumentError when ratio is outside (0, 1).
Split chronological_split(std::vector<BugReport> reports, double ratio);

/// chronological_split applied to each assignee's reports separately.
std::map<std::string, Split> per_developer_split(std::span<const BugReport> reports, double ratio);

/// Orders reports by (created_time, id).
void sort_chronologically(std::vector<BugReport>& reports);

}  // namespace bugtriage::corpus
