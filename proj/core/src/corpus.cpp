#include "bugtriage/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bugtriage/csv.hpp"

namespace bugtriage::corpus {

std::string Combination::key() const { return to_lower(trim(product)) + "/" + to_lower(trim(component)); }

std::string BugReport::text() const {
  std::string out = title;
  auto append = [&out](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out += ' ';
    out += s;
  };
  append(description);
  for (const auto& c : comments) append(c);
  return out;
}

std::optional<int> priority_rank(std::string_view label) {
  const std::string l = to_lower(trim(label));
  if (l.empty() || l == "--" || l == "none") return kDefaultPriority;
  if (l.size() == 2 && l[0] == 'p' && l[1] >= '1' && l[1] <= '5') return l[1] - '0';
  if (l.size() == 1 && l[0] >= '1' && l[0] <= '5') return l[0] - '0';
  static const std::map<std::string, int, std::less<>> named{
      {"highest", 1}, {"urgent", 1}, {"high", 2}, {"medium", 3}, {"low", 4}, {"lowest", 5}};
  if (auto it = named.find(l); it != named.end()) return it->second;
  return std::nullopt;
}

std::optional<int> severity_rank(std::string_view label) {
  const std::string l = to_lower(trim(label));
  if (l.empty() || l == "--" || l == "none") return kDefaultSeverity;
  static const std::map<std::string, int, std::less<>> named{
      {"blocker", 1}, {"critical", 2}, {"major", 3},      {"normal", 4},
      {"minor", 5},   {"trivial", 6},  {"enhancement", 7}};
  if (auto it = named.find(l); it != named.end()) return it->second;
  if (l.size() == 1 && l[0] >= '1' && l[0] <= '7') return l[0] - '0';
  return std::nullopt;
}

std::string priority_label(int rank) { return "P" + std::to_string(rank); }

std::string severity_label(int rank) {
  static const char* const names[] = {"blocker", "critical", "major",      "normal",
                                      "minor",   "trivial",  "enhancement"};
  if (rank < 1 || rank > kSeverityLevels) throw ArgumentError("severity rank out of range");
  return names[rank - 1];
}

ColumnMap ColumnMap::defaults() {
  return ColumnMap{{{"id", "Issue_id"},
                    {"product", "Product"},
                    {"component", "Component"},
                    {"title", "Title"},
                    {"description", "Description"},
                    {"priority", "Priority"},
                    {"severity", "Severity"},
                    {"status", "Status"},
                    {"resolution", "Resolution"},
                    {"assignee", "Assignee"},
                    {"created_time", "Created_time"},
                    {"resolved_time", "Resolved_time"},
                    {"comments", "Comments"}}};
}

const std::vector<std::string>& ColumnMap::canonical_fields() {
  static const std::vector<std::string> fields{
      "id",         "product",  "component", "title",        "description",   "priority", "severity",
      "status",     "resolution", "assignee", "created_time", "resolved_time", "comments"};
  return fields;
}

namespace {

std::vector<std::string> parse_comments(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return {};
  if (t.front() == '[') {
    auto j = nlohmann::json::parse(t, nullptr, false);
    if (j.is_array() && std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_string(); })) {
      return j.get<std::vector<std::string>>();
    }
  }
  return {t};
}

}  // namespace

ParseResult parse_csv_text(std::string_view text, const ColumnMap& column_map) {
  const auto records = csv::parse(text);
  ParseResult result;
  if (records.empty()) throw DataError("csv: missing header row");

  const auto& header = records.front();
  std::unordered_map<std::string, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) header_index.emplace(trim(header[i]), i);

  std::map<std::string, std::size_t> field_col;
  for (const auto& [field, column] : column_map.columns) {
    if (auto it = header_index.find(column); it != header_index.end()) field_col[field] = it->second;
  }
  for (const char* required : {"id", "title", "created_time"}) {
    if (!field_col.contains(required)) {
      throw DataError(std::string("csv: header lacks a column for required field '") + required + "'");
    }
  }

  std::unordered_set<std::string> seen_ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && trim(rec[0]).empty()) continue;  // blank line
    auto reject = [&](std::string reason) { result.rejects.push_back({r, std::move(reason)}); };
    if (rec.size() != header.size()) {
      reject("column count");
      continue;
    }
    auto get = [&](const char* field) -> std::string {
      auto it = field_col.find(field);
      return it == field_col.end() ? std::string{} : trim(rec[it->second]);
    };

    BugReport b;
    b.id = get("id");
    if (b.id.empty()) {
      reject("missing id");
      continue;
    }
    auto created = parse_timestamp(get("created_time"));
    if (!created) {
      reject("bad timestamp");
      continue;
    }
    b.created_time = *created;
    if (const auto resolved = get("resolved_time"); !resolved.empty()) {
      auto t = parse_timestamp(resolved);
      if (!t) {
        reject("bad timestamp");
        continue;
      }
      if (*t < b.created_time) {
        reject("resolved before created");
        continue;
      }
      b.resolved_time = *t;
    }
    const auto prio = priority_rank(get("priority"));
    if (!prio) {
      reject("bad priority");
      continue;
    }
    const auto sev = severity_rank(get("severity"));
    if (!sev) {
      reject("bad severity");
      continue;
    }
    b.priority = *prio;
    b.severity = *sev;
    b.product = get("product");
    b.component = get("component");
    b.title = get("title");
    b.description = get("description");
    b.comments = parse_comments(get("comments"));
    b.status = get("status");
    b.resolution = get("resolution");
    b.assignee = get("assignee");
    if (b.assignee.empty()) b.assignee = std::string(kUnassigned);

    if (!seen_ids.insert(b.id).second) {
      reject("duplicate id");
      continue;
    }
    result.reports.push_back(std::move(b));
  }
  return result;
}

ParseResult parse_csv(const std::filesystem::path& path, const ColumnMap& column_map) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("error while reading " + path.string());
  return parse_csv_text(ss.str(), column_map);
}

void write_csv(std::ostream& out, std::span<const BugReport> reports) {
  const auto defaults = ColumnMap::defaults();
  csv::Record header;
  for (const auto& f : ColumnMap::canonical_fields()) header.push_back(defaults.columns.at(f));
  csv::write_record(out, header);
  for (const auto& b : reports) {
    csv::write_record(out, {b.id, b.product, b.component, b.title, b.description,
                            priority_label(b.priority), severity_label(b.severity), b.status,
                            b.resolution, b.assignee, format_timestamp(b.created_time),
                            b.resolved_time ? format_timestamp(*b.resolved_time) : std::string{},
                            b.comments.empty() ? std::string{} : nlohmann::json(b.comments).dump()});
  }
}

void write_rejects_csv(std::ostream& out, std::span<const Reject> rejects) {
  csv::write_record(out, {"row_number", "reason"});
  for (const auto& r : rejects) csv::write_record(out, {std::to_string(r.row), r.reason});
}

void FilterConfig::validate() const {
  if (min_fixed < 1) throw ArgumentError("min_fixed must be >= 1");
}

bool is_generic_assignee(std::string_view assignee, const FilterConfig& cfg) {
  const std::string name = trim(assignee);
  for (const auto& pattern : cfg.name_blacklist) {
    if (pattern.empty() ? name.empty() : icontains(name, pattern)) return true;
  }
  return false;
}

nlohmann::json to_json(const CorpusStats& s) {
  nlohmann::json j;
  j["period"] = s.period ? nlohmann::json::array({format_timestamp(s.period->first),
                                                 format_timestamp(s.period->second)})
                         : nlohmann::json(nullptr);
  j["amount"] = s.amount;
  j["products"] = s.products;
  j["components"] = s.components;
  j["combinations"] = s.combinations;
  j["developers"] = s.developers;
  j["final_amount"] = s.final_amount;
  j["final_developers"] = s.final_developers;
  return j;
}

FilterResult filter_corpus(std::span<const BugReport> reports, const FilterConfig& cfg) {
  cfg.validate();
  FilterResult result;
  auto& st = result.stats;
  st.amount = reports.size();

  std::set<std::string> products, components, combinations, developers;
  for (const auto& b : reports) {
    if (!st.period) {
      st.period = std::pair{b.created_time, b.created_time};
    } else {
      st.period->first = std::min(st.period->first, b.created_time);
      st.period->second = std::max(st.period->second, b.created_time);
    }
    products.insert(to_lower(trim(b.product)));
    components.insert(to_lower(trim(b.component)));
    combinations.insert(b.combination().key());
    developers.insert(b.assignee);
  }
  st.products = products.size();
  st.components = components.size();
  st.combinations = combinations.size();
  st.developers = developers.size();

  std::map<std::string, std::size_t> fixed_count;
  auto qualifies = [&](const BugReport& b) {
    return iequals(trim(b.resolution), trim(cfg.required_resolution)) &&
           !is_generic_assignee(b.assignee, cfg);
  };
  for (const auto& b : reports) {
    if (qualifies(b)) ++fixed_count[b.assignee];
  }
  std::set<std::string> final_devs;
  for (const auto& b : reports) {
    if (qualifies(b) && fixed_count[b.assignee] >= cfg.min_fixed) {
      result.kept.push_back(b);
      final_devs.insert(b.assignee);
    }
  }
  st.final_amount = result.kept.size();
  st.final_developers = final_devs.size();
  return result;
}

void sort_chronologically(std::vector<BugReport>& reports) {
  std::sort(reports.begin(), reports.end(), [](const BugReport& a, const BugReport& b) {
    if (a.created_time != b.created_time) return a.created_time < b.created_time;
    return a.id < b.id;
  });
}

Split chronological_split(std::vector<BugReport> reports, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("split ratio must be in (0, 1)");
  sort_chronologically(reports);
  const auto n = reports.size();
  // Guard against ratio * n landing a hair above an integer.
  auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  n_train = std::min(n_train, n);
  Split s;
  s.train.assign(std::make_move_iterator(reports.begin()),
                 std::make_move_iterator(reports.begin() + static_cast<std::ptrdiff_t>(n_train)));
  s.test.assign(std::make_move_iterator(reports.begin() + static_cast<std::ptrdiff_t>(n_train)),
                std::make_move_iterator(reports.end()));
  return s;
}

std::map<std::string, Split> per_developer_split(std::span<const BugReport> reports, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ArgumentError("split ratio must be in (0, 1)");
  std::map<std::string, std::vector<BugReport>> groups;
  for (const auto& b : reports) groups[b.assignee].push_back(b);
  std::map<std::string, Split> out;
  for (auto& [dev, list] : groups) out.emplace(dev, chronological_split(std::move(list), ratio));
  return out;
}

}  // namespace bugtriage::corpus
