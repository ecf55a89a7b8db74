#include "bugtriage/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

#include "bugtriage/csv.hpp"

namespace bugtriage::eval {

namespace {

std::size_t hits_at(std::span<const EvalRecord> records, std::size_t k, const char* metric) {
  if (records.empty()) throw UndefinedMetricError(std::string(metric) + " is undefined for an empty record set");
  if (k == 0) throw ArgumentError(std::string(metric) + ": k must be at least 1");
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [k](const EvalRecord& r) {
    return r.hit_rank && *r.hit_rank <= k;
  }));
}

nlohmann::json metric_map(const std::map<std::size_t, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

std::map<std::size_t, double> metric_map_from(const nlohmann::json& j) {
  std::map<std::size_t, double> m;
  for (const auto& [k, v] : j.items()) m[static_cast<std::size_t>(std::stoul(k))] = v.get<double>();
  return m;
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

}  // namespace

double topk_accuracy(std::span<const EvalRecord> records, std::size_t k) {
  return static_cast<double>(hits_at(records, k, "top-k accuracy")) / static_cast<double>(records.size());
}

double recall(std::span<const EvalRecord> records, std::size_t k) {
  return static_cast<double>(hits_at(records, k, "recall")) / static_cast<double>(records.size());
}

double precision(std::span<const EvalRecord> records, std::size_t k) {
  return static_cast<double>(hits_at(records, k, "precision")) / static_cast<double>(k * records.size());
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::per_developer:
      return "per_developer";
    case Backend::mtm:
      return "mtm";
    case Backend::both:
      return "both";
  }
  return "per_developer";
}

Backend backend_from_string(std::string_view s) {
  if (s == "per_developer" || s == "per-developer") return Backend::per_developer;
  if (s == "mtm") return Backend::mtm;
  if (s == "both") return Backend::both;
  throw ArgumentError("unknown backend '" + std::string(s) + "'");
}

PreparedSplit prepare_split(std::span<const corpus::BugReport> reports, double ratio, SplitMode mode) {
  PreparedSplit out;
  if (mode == SplitMode::global) {
    auto s = corpus::chronological_split({reports.begin(), reports.end()}, ratio);
    out.train = std::move(s.train);
    out.test = std::move(s.test);
  } else {
    for (auto& [_, s] : corpus::per_developer_split(reports, ratio)) {
      out.train.insert(out.train.end(), s.train.begin(), s.train.end());
      out.test.insert(out.test.end(), s.test.begin(), s.test.end());
    }
    corpus::sort_chronologically(out.train);
    corpus::sort_chronologically(out.test);
  }
  return out;
}

triage::ModelStore train_store(std::span<const corpus::BugReport> train, const EvalConfig& cfg) {
  triage::ModelStore store;
  if (cfg.backend != Backend::mtm) {
    std::map<std::string, std::vector<corpus::BugReport>> by_dev;
    for (const auto& r : train) by_dev[r.assignee].push_back(r);
    for (auto it = by_dev.begin(); it != by_dev.end();) {
      it = it->second.size() < std::max<std::size_t>(cfg.model.min_reports, 1) ? by_dev.erase(it) : std::next(it);
    }
    for (auto& m : triage::fit_developer_models(by_dev, cfg.model, cfg.jobs)) {
      store.put(std::make_shared<const devtopics::DeveloperTopicModel>(std::move(m)));
    }
  }
  if (cfg.backend != Backend::per_developer) {
    store.set_mtm(std::make_shared<const triage::MtmBundle>(triage::train_mtm(train, cfg.model.tokens, cfg.mtm)));
  }
  return store;
}

void compute_metrics(EvalRun& run, std::size_t max_k) {
  run.ks.clear();
  run.top_k.clear();
  run.precision.clear();
  run.recall.clear();
  for (std::size_t k = 1; k <= max_k; ++k) {
    run.ks.push_back(k);
    run.top_k[k] = topk_accuracy(run.records, k);
    run.precision[k] = precision(run.records, k);
    run.recall[k] = recall(run.records, k);
  }
}

EvalRun evaluate_prepared(const PreparedSplit& split, const triage::ModelStore& store, const EvalConfig& cfg) {
  if (split.test.empty()) throw InsufficientDataError("evaluate: the test split is empty");
  if (split.train.empty()) throw InsufficientDataError("evaluate: the train split is empty");
  if (cfg.max_k == 0) throw ArgumentError("evaluate: max_k must be at least 1");
  const auto started = std::chrono::steady_clock::now();

  EvalRun run;
  run.project = cfg.project;
  run.system = to_string(cfg.backend);
  run.split_ratio = cfg.split_ratio;
  run.train_size = split.train.size();
  run.test_size = split.test.size();
  run.metadata = {{"seed", cfg.model.seed},
                  {"online_update", cfg.online_update},
                  {"split_mode", cfg.split_mode == SplitMode::global ? "global" : "per_developer"}};

  triage::TriageState state;
  state.profiles = profiles::build_profiles(split.train);
  state.mtm = store.mtm_ptr();
  for (const auto& r : split.train) {
    if (!run.audit.max_train_time || r.created_time > *run.audit.max_train_time) run.audit.max_train_time = r.created_time;
  }

  // Latest report the models have seen; advances with online updates.
  auto horizon = run.audit.max_train_time;
  triage::ModelStore live = store;
  for (const auto& report : split.test) {
    ++run.audit.checked;
    if (horizon && *horizon > report.created_time) {
      run.audit.violations.push_back(report.id);
    }
    triage::RecommendationRequest req;
    req.report = report;
    req.report.assignee = std::string(corpus::kUnassigned);
    req.k = cfg.max_k;
    req.as_of = report.created_time;
    req.filters = cfg.filters;
    if (cfg.online_update) live.set_mtm(state.mtm);
    const auto result = triage::recommend(req, state.profiles, live, cfg.triage);

    EvalRecord rec;
    rec.report_id = report.id;
    rec.true_developer = report.assignee;
    rec.created_time = report.created_time;
    for (std::size_t i = 0; i < result.results.size(); ++i) {
      rec.recommended.push_back(result.results[i].developer);
      if (!rec.hit_rank && result.results[i].developer == report.assignee) rec.hit_rank = i + 1;
    }
    run.records.push_back(std::move(rec));

    if (cfg.online_update) {
      state = triage::assign(report, report.assignee, state, cfg.triage);
      if (!horizon || report.created_time > *horizon) horizon = report.created_time;
    }
  }
  compute_metrics(run, cfg.max_k);
  run.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

EvalRun evaluate(std::span<const corpus::BugReport> reports, const EvalConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const auto split = prepare_split(reports, cfg.split_ratio, cfg.split_mode);
  if (split.test.empty()) throw InsufficientDataError("evaluate: the test split is empty");
  const auto store = train_store(split.train, cfg);
  auto run = evaluate_prepared(split, store, cfg);
  run.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return run;
}

nlohmann::json to_json(const EvalRun& run) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : run.records) {
    records.push_back({{"report_id", r.report_id},
                       {"true_developer", r.true_developer},
                       {"created_time", format_timestamp(r.created_time)},
                       {"recommended", r.recommended},
                       {"hit_rank", r.hit_rank ? nlohmann::json(*r.hit_rank) : nlohmann::json(nullptr)}});
  }
  return {{"project", run.project},
          {"system", run.system},
          {"split_ratio", run.split_ratio},
          {"ks", run.ks},
          {"train_size", run.train_size},
          {"test_size", run.test_size},
          {"metrics", {{"top_k", metric_map(run.top_k)}, {"precision", metric_map(run.precision)}, {"recall", metric_map(run.recall)}}},
          {"audit",
           {{"max_train_time", run.audit.max_train_time ? nlohmann::json(format_timestamp(*run.audit.max_train_time))
                                                        : nlohmann::json(nullptr)},
            {"checked", run.audit.checked},
            {"violations", run.audit.violations},
            {"ok", run.audit.ok()}}},
          {"metadata", run.metadata.is_null() ? nlohmann::json::object() : run.metadata},
          {"records", records}};
}

EvalRun eval_run_from_json(const nlohmann::json& j) {
  try {
    EvalRun run;
    run.project = j.at("project").get<std::string>();
    run.system = j.at("system").get<std::string>();
    run.split_ratio = j.at("split_ratio").get<double>();
    run.ks = j.at("ks").get<std::vector<std::size_t>>();
    run.train_size = j.at("train_size").get<std::size_t>();
    run.test_size = j.at("test_size").get<std::size_t>();
    run.top_k = metric_map_from(j.at("metrics").at("top_k"));
    run.precision = metric_map_from(j.at("metrics").at("precision"));
    run.recall = metric_map_from(j.at("metrics").at("recall"));
    const auto& audit = j.at("audit");
    if (!audit.at("max_train_time").is_null()) run.audit.max_train_time = parse_timestamp(audit.at("max_train_time").get<std::string>());
    run.audit.checked = audit.at("checked").get<std::size_t>();
    run.audit.violations = audit.at("violations").get<std::vector<std::string>>();
    run.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& r : j.at("records")) {
      EvalRecord rec;
      rec.report_id = r.at("report_id").get<std::string>();
      rec.true_developer = r.at("true_developer").get<std::string>();
      auto t = parse_timestamp(r.at("created_time").get<std::string>());
      if (!t) throw DataError("eval run: bad timestamp");
      rec.created_time = *t;
      rec.recommended = r.at("recommended").get<std::vector<std::string>>();
      if (!r.at("hit_rank").is_null()) rec.hit_rank = r.at("hit_rank").get<std::size_t>();
      run.records.push_back(std::move(rec));
    }
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("eval run: ") + e.what());
  }
}

std::vector<Baseline> parse_baselines(std::string_view text) {
  const auto records = csv::parse(text);
  std::vector<Baseline> out;
  bool header = true;
  std::size_t line = 0;
  for (const auto& rec : records) {
    ++line;
    if (rec.size() == 1 && trim(rec[0]).empty()) continue;
    if (header) {
      header = false;
      if (rec.size() < 4 || to_lower(trim(rec[0])) != "system" || to_lower(trim(rec[3])) != "value") {
        throw DataError("baselines: expected header system,project,k,value");
      }
      continue;
    }
    if (rec.size() != 4) throw DataError("baselines: record " + std::to_string(line) + " needs 4 fields");
    Baseline b;
    b.system = trim(rec[0]);
    b.project = trim(rec[1]);
    try {
      b.k = static_cast<std::size_t>(std::stoul(trim(rec[2])));
      b.value = std::stod(trim(rec[3]));
    } catch (const std::exception&) {
      throw DataError("baselines: bad number in record " + std::to_string(line));
    }
    if (b.k == 0 || b.value < 0.0 || b.value > 1.0) throw DataError("baselines: value out of range in record " + std::to_string(line));
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Baseline> load_baselines(const std::filesystem::path& path) { return parse_baselines(read_file(path)); }

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

Tables report_table(std::span<const EvalRun> runs, std::span<const Baseline> baselines,
                    std::span<const std::size_t> comparison_ks) {
  std::ostringstream md, csv_out;
  std::size_t max_k = 0;
  for (const auto& r : runs) {
    for (auto k : r.ks) max_k = std::max(max_k, k);
  }

  // Summary: one row per run.
  if (!runs.empty()) {
    md << "## Top-K accuracy\n\n| Project | System |";
    for (std::size_t k = 1; k <= max_k; ++k) md << " Top-" << k << " |";
    md << "\n|---|---|";
    for (std::size_t k = 1; k <= max_k; ++k) md << "---|";
    md << "\n";
    csv_out << "table,project,system,metric,k,value\n";
    for (const auto& r : runs) {
      md << "| " << md_escape(r.project) << " | " << md_escape(r.system) << " |";
      for (std::size_t k = 1; k <= max_k; ++k) {
        auto it = r.top_k.find(k);
        md << " " << (it == r.top_k.end() ? "-" : format_metric(it->second)) << " |";
      }
      md << "\n";
      for (const auto& [metric, values] :
           {std::pair{"top_k", &r.top_k}, std::pair{"precision", &r.precision}, std::pair{"recall", &r.recall}}) {
        for (const auto& [k, v] : *values) {
          csv::write_record(csv_out, {"summary", r.project, r.system, metric, std::to_string(k), format_metric(v)});
        }
      }
    }
    md << "\n## Precision and recall\n\n| Project | System | k | Precision | Recall |\n|---|---|---|---|---|\n";
    for (const auto& r : runs) {
      for (auto k : r.ks) {
        md << "| " << md_escape(r.project) << " | " << md_escape(r.system) << " | " << k << " | "
           << format_metric(r.precision.at(k)) << " | " << format_metric(r.recall.at(k)) << " |\n";
      }
    }
    md << "\n";
  } else {
    csv_out << "table,project,system,metric,k,value\n";
  }

  // Comparison tables: projects x systems for selected k.
  std::vector<std::size_t> ks(comparison_ks.begin(), comparison_ks.end());
  if (ks.empty()) {
    std::set<std::size_t> wanted;
    for (const auto& b : baselines) wanted.insert(b.k);
    if (wanted.empty()) wanted = {1, 5};
    ks.assign(wanted.begin(), wanted.end());
  }
  for (auto k : ks) {
    std::vector<std::string> systems, projects;
    std::map<std::pair<std::string, std::string>, double> cells;  // (project, system)
    auto add_unique = [](std::vector<std::string>& v, const std::string& s) {
      if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& r : runs) {
      if (auto it = r.top_k.find(k); it != r.top_k.end()) {
        add_unique(systems, r.system);
        add_unique(projects, r.project);
        cells[{r.project, r.system}] = it->second;
      }
    }
    for (const auto& b : baselines) {
      const std::string sys = b.system + " (published)";
      add_unique(systems, sys);
      add_unique(projects, b.project);
      if (b.k == k) cells[{b.project, sys}] = b.value;
    }
    if (systems.empty()) continue;

    md << "## Top-" << k << " accuracy comparison\n\n| Projects |";
    for (const auto& s : systems) md << " " << md_escape(s) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < systems.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& p : projects) {
      md << "| " << md_escape(p) << " |";
      for (const auto& s : systems) {
        auto it = cells.find({p, s});
        md << " " << (it == cells.end() ? "-" : format_metric(it->second)) << " |";
        if (it != cells.end()) csv::write_record(csv_out, {"top" + std::to_string(k), p, s, "top_k", std::to_string(k), format_metric(it->second)});
      }
      md << "\n";
    }
    md << "| **Average** |";
    for (const auto& s : systems) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& p : projects) {
        if (auto it = cells.find({p, s}); it != cells.end()) {
          sum += it->second;
          ++n;
        }
      }
      const std::string cell = n ? format_metric(sum / static_cast<double>(n)) : "-";
      md << " " << cell << " |";
      if (n) csv::write_record(csv_out, {"top" + std::to_string(k), "Average", s, "top_k", std::to_string(k), cell});
    }
    md << "\n\n";
  }
  md << "Precision is computed over k x N recommendation slots, recall over N reports. "
        "Columns marked (published) are loaded from the baselines file, not computed here.\n";
  return {md.str(), csv_out.str()};
}

}  // namespace bugtriage::eval
