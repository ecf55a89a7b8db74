#include "bugtriage_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "bugtriage/common.hpp"
#include "bugtriage/corpus.hpp"
#include "bugtriage/developer_model.hpp"
#include "bugtriage/eval.hpp"
#include "bugtriage/profiles.hpp"
#include "bugtriage/synthetic.hpp"
#include "bugtriage/triage.hpp"
#include "bugtriage_cli/config.hpp"

namespace bugtriage::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Context {
  Config cfg;
  std::ostream& out;
  std::shared_ptr<spdlog::logger> log;
};

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

json read_json(const fs::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void log_header(const Context& ctx, const char* command) {
  ctx.log->info("{}: config hash {} seed {}", command, ctx.cfg.hash(), ctx.cfg.seed());
}

// ---------------------------------------------------------------- ingest

struct Ingested {
  corpus::FilterResult filtered;
  std::vector<corpus::Reject> rejects;
};

Ingested ingest(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.datasets.empty()) throw ArgumentError("no dataset given (use --dataset or the config 'dataset' key)");
  Ingested result;
  std::vector<corpus::BugReport> all;
  for (const auto& path : cfg.datasets) {
    if (!fs::is_regular_file(path)) throw DataError("dataset not found: " + path.string());
    auto parsed = corpus::parse_csv(path, cfg.column_map);
    ctx.log->info("{}: {} reports, {} rejected rows", path.string(), parsed.reports.size(), parsed.rejects.size());
    for (auto& r : parsed.rejects) {
      if (cfg.datasets.size() > 1) r.reason = path.filename().string() + ": " + r.reason;
      result.rejects.push_back(std::move(r));
    }
    std::move(parsed.reports.begin(), parsed.reports.end(), std::back_inserter(all));
  }
  result.filtered = corpus::filter_corpus(all, cfg.filter);
  corpus::sort_chronologically(result.filtered.kept);

  const auto& out_dir = cfg.out_dir;
  std::ostringstream corpus_csv, rejects_csv;
  corpus::write_csv(corpus_csv, result.filtered.kept);
  corpus::write_rejects_csv(rejects_csv, result.rejects);
  auto stats = corpus::to_json(result.filtered.stats);
  stats["seed"] = cfg.seed();
  stats["config_hash"] = cfg.hash();
  write_file_atomic(out_dir / kCorpusFile, corpus_csv.str());
  write_file_atomic(out_dir / kRejectsFile, rejects_csv.str());
  write_file_atomic(out_dir / kStatsFile, pretty(stats));
  ctx.log->info("kept {} of {} reports from {} developers", result.filtered.stats.final_amount,
                result.filtered.stats.amount, result.filtered.stats.final_developers);
  return result;
}

int cmd_ingest(const Context& ctx) {
  log_header(ctx, "ingest");
  const auto ingested = ingest(ctx);
  auto stats = corpus::to_json(ingested.filtered.stats);
  stats["seed"] = ctx.cfg.seed();
  stats["config_hash"] = ctx.cfg.hash();
  ctx.out << pretty(stats);
  return 0;
}

/// The filtered corpus cached by ingest; ingests first when the cache is
/// absent and a dataset is configured.
std::vector<corpus::BugReport> load_corpus(const Context& ctx) {
  const auto path = ctx.cfg.out_dir / kCorpusFile;
  if (!fs::is_regular_file(path)) {
    if (ctx.cfg.datasets.empty()) {
      throw MissingArtifactError("no ingested corpus at " + path.string() + "; run ingest first");
    }
    ctx.log->info("no ingested corpus at {}; ingesting now", path.string());
    return ingest(ctx).filtered.kept;
  }
  auto parsed = corpus::parse_csv(path);
  if (!parsed.rejects.empty()) throw DataError(path.string() + " has rejected rows; re-run ingest");
  return std::move(parsed.reports);
}

// ---------------------------------------------------------------- train

fs::path profile_file_name(const std::string& developer) {
  auto name = devtopics::model_file_name(developer);
  return fs::path(name).replace_extension(".json");
}

int cmd_train(const Context& ctx) {
  log_header(ctx, "train");
  const auto& cfg = ctx.cfg;
  const auto started = std::chrono::steady_clock::now();
  const auto reports = load_corpus(ctx);
  if (reports.empty()) {
    throw InsufficientDataError("no developer has at least " + std::to_string(cfg.filter.min_fixed) +
                                " fixed reports; nothing to train");
  }
  const auto split = eval::prepare_split(reports, cfg.eval.split_ratio, cfg.eval.split_mode);
  if (split.train.empty()) throw InsufficientDataError("the train split is empty");

  const auto models_dir = cfg.resolved_models_dir();
  fs::create_directories(models_dir);
  devtopics::ModelIndex index;
  std::optional<Timestamp> max_train;
  for (const auto& r : split.train) {
    if (!max_train || r.created_time > *max_train) max_train = r.created_time;
  }

  const auto backend = cfg.eval.backend;
  if (backend != eval::Backend::mtm) {
    std::map<std::string, std::vector<corpus::BugReport>> by_dev;
    for (const auto& r : split.train) by_dev[r.assignee].push_back(r);
    for (auto it = by_dev.begin(); it != by_dev.end();) {
      it = it->second.size() < std::max<std::size_t>(cfg.eval.model.min_reports, 1) ? by_dev.erase(it) : std::next(it);
    }
    if (by_dev.empty()) throw InsufficientDataError("no developer has enough training reports");
    std::optional<devtopics::ExternalEmbeddings> external;
    if (cfg.eval.model.embedding.kind == devtopics::EmbeddingKind::external_file) {
      external = devtopics::ExternalEmbeddings::load(cfg.eval.model.embedding.path);
    }
    const auto models =
        triage::fit_developer_models(by_dev, cfg.eval.model, cfg.eval.jobs, external ? &*external : nullptr);
    for (const auto& m : models) {
      auto entry = devtopics::index_entry(m);
      devtopics::save_model(models_dir / entry.file, m);
      ctx.log->info("model {}: {} reports, {} topics, {} outliers", m.developer, entry.report_count,
                    entry.topic_count, entry.outlier_count);
      for (const auto& w : m.warnings) ctx.log->warn("model {}: {}", m.developer, w);
      index.entries.push_back(std::move(entry));
    }
  }
  if (backend != eval::Backend::per_developer) {
    const auto mtm_started = std::chrono::steady_clock::now();
    const auto bundle = triage::train_mtm(split.train, cfg.eval.model.tokens, cfg.eval.mtm);
    write_file_atomic(models_dir / triage::kMtmFile, pretty(triage::to_json(bundle)));
    ctx.log->info("mtm: {} topics, {} developers, {:.2f}s", bundle.model.lda.num_topics,
                  bundle.model.developers.size(),
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - mtm_started).count());
  } else {
    fs::remove(models_dir / triage::kMtmFile);
  }

  index.metadata = {{"seed", cfg.seed()},
                    {"config_hash", cfg.hash()},
                    {"backend", eval::to_string(backend)},
                    {"split_ratio", cfg.eval.split_ratio},
                    {"split_mode", cfg.eval.split_mode == eval::SplitMode::global ? "global" : "per_developer"},
                    {"train_size", split.train.size()},
                    {"max_train_time", max_train ? json(format_timestamp(*max_train)) : json(nullptr)}};
  devtopics::save_model_index(models_dir, index);

  triage::TriageState state;
  state.profiles = profiles::build_profiles(split.train);
  write_file_atomic(cfg.out_dir / kStateFile, pretty(triage::to_json(state)));
  for (const auto& [name, p] : state.profiles) {
    write_file_atomic(cfg.out_dir / kProfilesDir / profile_file_name(name), pretty(profiles::to_json(p)));
  }

  ctx.log->info("trained on {} reports in {:.2f}s", split.train.size(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  ctx.out << pretty(devtopics::to_json(index));
  return 0;
}

// ---------------------------------------------------------------- report input

struct ReportFlags {
  std::string file;
  std::string id;
  std::string title;
  std::string description;
  std::string product;
  std::string component;
  std::string priority;
  std::string severity;
  std::string created;
  std::string as_of;
};

int rank_from_json(const json& v, bool is_priority) {
  if (v.is_number_integer()) return v.get<int>();
  const auto label = v.is_null() ? std::string() : v.get<std::string>();
  const auto rank = is_priority ? corpus::priority_rank(label) : corpus::severity_rank(label);
  if (!rank) throw DataError(std::string("unknown ") + (is_priority ? "priority" : "severity") + " '" + label + "'");
  return *rank;
}

Timestamp timestamp_or_throw(const std::string& text, const char* what) {
  const auto t = parse_timestamp(text);
  if (!t) throw ArgumentError(std::string("cannot parse ") + what + " '" + text + "'");
  return *t;
}

corpus::BugReport report_from_json(const json& j) {
  try {
    corpus::BugReport r;
    const auto& id = j.at("id");
    r.id = id.is_string() ? id.get<std::string>() : id.dump();
    r.product = j.value("product", std::string());
    r.component = j.value("component", std::string());
    r.title = j.value("title", std::string());
    r.description = j.value("description", std::string());
    r.comments = j.value("comments", std::vector<std::string>{});
    if (j.contains("priority")) r.priority = rank_from_json(j.at("priority"), true);
    if (j.contains("severity")) r.severity = rank_from_json(j.at("severity"), false);
    r.assignee = j.value("assignee", std::string(corpus::kUnassigned));
    const auto created = parse_timestamp(j.value("created_time", std::string()));
    if (!created) throw DataError("report needs a parseable created_time");
    r.created_time = *created;
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::optional<corpus::BugReport> find_by_id(std::span<const corpus::BugReport> reports, const std::string& id) {
  for (const auto& r : reports) {
    if (r.id == id) return r;
  }
  return std::nullopt;
}

/// Latest activity in the profiles; the default creation time for reports
/// given only by flags.
std::optional<Timestamp> latest_activity(const profiles::ProfileMap& profiles) {
  std::optional<Timestamp> latest;
  for (const auto& [_, p] : profiles) {
    if (p.last_active && (!latest || *p.last_active > *latest)) latest = p.last_active;
  }
  return latest;
}

corpus::BugReport resolve_report(const Context& ctx, const ReportFlags& f, const profiles::ProfileMap& profiles) {
  if (!f.file.empty()) {
    const fs::path path = f.file;
    if (path.extension() == ".csv") {
      const auto parsed = corpus::parse_csv(path, ctx.cfg.column_map);
      if (parsed.reports.empty()) throw DataError(path.string() + " holds no valid report");
      if (f.id.empty()) return parsed.reports.front();
      if (auto r = find_by_id(parsed.reports, f.id)) return *r;
      throw DataError("report " + f.id + " not found in " + path.string());
    }
    return report_from_json(read_json(path));
  }
  if (!f.id.empty() && f.title.empty() && f.description.empty()) {
    const auto reports = load_corpus(ctx);
    if (auto r = find_by_id(reports, f.id)) return *r;
    throw DataError("report " + f.id + " not found in the ingested corpus");
  }
  if (f.title.empty() && f.description.empty()) {
    throw ArgumentError("give a report with --report FILE, --report-id ID or --title/--description");
  }
  corpus::BugReport r;
  r.id = f.id.empty() ? "adhoc" : f.id;
  r.title = f.title;
  r.description = f.description;
  r.product = f.product;
  r.component = f.component;
  if (!f.priority.empty()) r.priority = rank_from_json(json(f.priority), true);
  if (!f.severity.empty()) r.severity = rank_from_json(json(f.severity), false);
  if (!f.created.empty()) {
    r.created_time = timestamp_or_throw(f.created, "--created");
  } else if (auto latest = latest_activity(profiles)) {
    r.created_time = *latest;
  } else {
    throw ArgumentError("--created is required when no profile has any activity");
  }
  return r;
}

triage::TriageState load_state(const Context& ctx) {
  const auto path = ctx.cfg.out_dir / kStateFile;
  if (!fs::is_regular_file(path)) throw MissingArtifactError("no triage state at " + path.string() + "; run train first");
  return triage::triage_state_from_json(read_json(path));
}

triage::ModelStore load_store(const Context& ctx) {
  const auto dir = ctx.cfg.resolved_models_dir();
  if (!fs::is_directory(dir)) throw MissingArtifactError("models directory not found: " + dir.string());
  return triage::ModelStore::load(dir);
}

// ---------------------------------------------------------------- recommend

int cmd_recommend(const Context& ctx, const ReportFlags& flags) {
  log_header(ctx, "recommend");
  const auto store = load_store(ctx);
  const auto state = load_state(ctx);
  triage::RecommendationRequest req;
  req.report = resolve_report(ctx, flags, state.profiles);
  req.report.assignee = std::string(corpus::kUnassigned);
  req.k = ctx.cfg.eval.max_k;
  req.filters = ctx.cfg.eval.filters;
  if (!flags.as_of.empty()) req.as_of = timestamp_or_throw(flags.as_of, "--as-of");
  const auto result = triage::recommend(req, state.profiles, store, ctx.cfg.eval.triage);
  if (result.fallback != triage::FallbackLevel::none) {
    ctx.log->warn("candidate filters emptied the pool; fallback {}", triage::to_string(result.fallback));
  }
  ctx.out << pretty(triage::to_json(result));
  return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const Context& ctx) {
  log_header(ctx, "evaluate");
  const auto& cfg = ctx.cfg;
  const auto store = load_store(ctx);
  const auto index = devtopics::load_model_index(cfg.resolved_models_dir());
  if (index.metadata.value("config_hash", std::string()) != cfg.hash()) {
    ctx.log->warn("models were trained with config hash {}, evaluating with {}",
                  index.metadata.value("config_hash", std::string("?")), cfg.hash());
  }
  const auto reports = load_corpus(ctx);
  const auto split = eval::prepare_split(reports, cfg.eval.split_ratio, cfg.eval.split_mode);
  auto run = eval::evaluate_prepared(split, store, cfg.eval);
  run.metadata["config_hash"] = cfg.hash();

  if (run.audit.max_train_time) {
    ctx.log->info("leakage audit: max train time {}, {} reports checked, {} violations",
                  format_timestamp(*run.audit.max_train_time), run.audit.checked, run.audit.violations.size());
  }
  if (!run.audit.ok()) {
    ctx.log->warn("{} test reports predate the end of the training data", run.audit.violations.size());
  }
  for (const auto k : run.ks) {
    ctx.log->info("top-{} accuracy {:.4f} precision {:.4f} recall {:.4f}", k, run.top_k.at(k), run.precision.at(k),
                  run.recall.at(k));
  }
  ctx.log->info("evaluated {} reports in {:.2f}s", run.test_size, run.duration_seconds);

  std::vector<eval::Baseline> baselines;
  if (cfg.baselines) baselines = eval::load_baselines(*cfg.baselines);
  const std::vector<eval::EvalRun> runs{run};
  const auto tables = eval::report_table(runs, baselines);
  write_file_atomic(cfg.out_dir / kEvalRunFile, pretty(eval::to_json(run)));
  write_file_atomic(cfg.out_dir / kTablesMarkdownFile, tables.markdown);
  write_file_atomic(cfg.out_dir / kTablesCsvFile, tables.csv);
  ctx.out << tables.markdown;
  return 0;
}

// ---------------------------------------------------------------- assign

int cmd_assign(const Context& ctx, const ReportFlags& flags, const std::string& developer) {
  log_header(ctx, "assign");
  if (developer.empty()) throw ArgumentError("--developer is required");
  auto state = load_state(ctx);
  const auto models_dir = ctx.cfg.resolved_models_dir();
  const auto mtm_path = models_dir / triage::kMtmFile;
  if (fs::is_regular_file(mtm_path)) {
    state.mtm = std::make_shared<const triage::MtmBundle>(triage::mtm_bundle_from_json(read_json(mtm_path)));
  }
  auto report = resolve_report(ctx, flags, state.profiles);
  report.assignee = developer;
  const auto next = triage::assign(report, developer, state, ctx.cfg.eval.triage);

  write_file_atomic(ctx.cfg.out_dir / kStateFile, pretty(triage::to_json(next)));
  const auto& p = next.profiles.at(developer);
  write_file_atomic(ctx.cfg.out_dir / kProfilesDir / profile_file_name(developer), pretty(profiles::to_json(p)));
  if (next.mtm && next.mtm != state.mtm) write_file_atomic(mtm_path, pretty(triage::to_json(*next.mtm)));

  const auto pending = next.pending.count(developer) ? next.pending.at(developer) : 0;
  const bool stale = next.stale.count(developer) > 0;
  if (stale) ctx.log->warn("model for {} is due for a refit ({} pending assignments)", developer, pending);
  ctx.out << pretty({{"developer", developer},
                     {"report_id", report.id},
                     {"amount_of_bugs", p.amount_of_bugs},
                     {"top_bug", p.top_bug.key()},
                     {"last_active", p.last_active ? json(format_timestamp(*p.last_active)) : json(nullptr)},
                     {"pending", pending},
                     {"stale", stale}});
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Context& ctx, const std::string& output, std::size_t per_developer, std::size_t noise) {
  log_header(ctx, "synth");
  synthetic::PlantedProjectConfig pc;
  pc.seed = ctx.cfg.seed();
  pc.reports_per_developer = per_developer;
  pc.noise_reports = noise;
  const auto reports = synthetic::planted_project(pc);
  std::ostringstream csv;
  corpus::write_csv(csv, reports);
  if (output.empty() || output == "-") {
    ctx.out << csv.str();
  } else {
    write_file_atomic(output, csv.str());
    ctx.log->info("wrote {} reports to {}", reports.size(), output);
  }
  return 0;
}

// ---------------------------------------------------------------- flags

struct Flags {
  std::string config;
  std::vector<std::string> datasets;
  std::string project, out, models_dir, baselines, backend, clusterer, reducer, embedding, split_mode;
  std::uint64_t seed = 0;
  std::size_t k = 0, min_fixed = 0, topics = 0, iterations = 0, jobs = 0;
  double split = 0.0, alpha = 0.0, beta = 0.0;
  int window_days = 0;
  bool online_update = false, no_date = false, no_priority = false, no_severity = false, quiet = false;
};

bool given(const CLI::App& app, const char* name) { return app.count(name) > 0; }

Config resolve_config(const CLI::App& app, const Flags& f) {
  Config c;
  if (given(app, "--config")) c = load_config_file(f.config, c);
  json j = json::object();
  if (given(app, "--dataset")) j["dataset"] = f.datasets;
  if (given(app, "--project")) j["project"] = f.project;
  if (given(app, "--backend")) j["backend"] = f.backend;
  if (given(app, "--clusterer")) {
    // Keep tuned sizes from the config file when only the kind changes.
    c.eval.model.clusterer =
        f.clusterer == "kmeans" ? devtopics::ClustererKind::kmeans : devtopics::ClustererKind::density;
  }
  if (given(app, "--reducer")) j["reducer"] = f.reducer;
  if (given(app, "--embedding")) j["embedding"] = f.embedding;
  if (given(app, "--topics")) j["topics"] = f.topics;
  if (given(app, "--alpha")) j["alpha"] = f.alpha;
  if (given(app, "--beta")) j["beta"] = f.beta;
  if (given(app, "--iterations")) j["iterations"] = f.iterations;
  if (given(app, "--split")) j["split"] = f.split;
  if (given(app, "--split-mode")) j["split_mode"] = f.split_mode;
  if (given(app, "--k")) j["k"] = f.k;
  if (given(app, "--window-days")) j["window_days"] = f.window_days;
  if (given(app, "--seed")) j["seed"] = f.seed;
  if (given(app, "--jobs")) j["jobs"] = f.jobs;
  if (given(app, "--online-update")) j["online_update"] = f.online_update;
  if (given(app, "--out")) j["out"] = f.out;
  if (given(app, "--models-dir")) j["models_dir"] = f.models_dir;
  if (given(app, "--baselines")) j["baselines"] = f.baselines;
  c = apply_config_json(std::move(c), j);
  if (given(app, "--min-fixed")) c.filter.min_fixed = f.min_fixed;
  if (f.no_date) c.eval.filters.date = false;
  if (f.no_priority) c.eval.filters.priority = false;
  if (f.no_severity) c.eval.filters.severity = false;
  c.validate();
  return c;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DataError*>(&e)) return 2;
  if (dynamic_cast<const InsufficientDataError*>(&e)) return 3;
  if (dynamic_cast<const MissingArtifactError*>(&e)) return 4;
  return 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Developer recommendation for incoming bug reports", "bugtriage"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON config file; flags override its keys");
  app.add_option("--dataset", f.datasets, "Bug report CSV file(s)");
  app.add_option("--project", f.project, "Project name used in tables");
  app.add_option("--out", f.out, "Output directory (default out)");
  app.add_option("--models-dir", f.models_dir, "Model directory (default <out>/models)");
  app.add_option("--baselines", f.baselines, "Published baseline CSV (system,project,k,value)");
  app.add_option("--backend", f.backend, "per_developer, mtm or both")
      ->check(CLI::IsMember({"per_developer", "mtm", "both"}));
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--k", f.k, "Number of developers to recommend")->check(CLI::PositiveNumber);
  app.add_option("--split", f.split, "Chronological train fraction")->check(CLI::Range(0.0, 1.0));
  app.add_option("--split-mode", f.split_mode, "global or per_developer")
      ->check(CLI::IsMember({"global", "per_developer"}));
  app.add_option("--min-fixed", f.min_fixed, "Minimum fixed reports per developer");
  app.add_option("--window-days", f.window_days, "Activity window in days")->check(CLI::NonNegativeNumber);
  app.add_option("--clusterer", f.clusterer, "density or kmeans")->check(CLI::IsMember({"density", "kmeans"}));
  app.add_option("--reducer", f.reducer, "pca or none")->check(CLI::IsMember({"pca", "none"}));
  app.add_option("--embedding", f.embedding, "tfidf-lsa or file:PATH");
  app.add_option("--topics", f.topics, "Number of MTM topics")->check(CLI::PositiveNumber);
  app.add_option("--alpha", f.alpha, "MTM document-topic prior");
  app.add_option("--beta", f.beta, "MTM topic-word prior");
  app.add_option("--iterations", f.iterations, "Gibbs sweeps")->check(CLI::PositiveNumber);
  app.add_option("--jobs", f.jobs, "Worker threads for per-developer fits")->check(CLI::PositiveNumber);
  app.add_flag("--online-update", f.online_update, "Fold each evaluated report in after scoring it");
  app.add_flag("--no-date-filter", f.no_date, "Disable the activity-date filter");
  app.add_flag("--no-priority-filter", f.no_priority, "Disable the priority filter");
  app.add_flag("--no-severity-filter", f.no_severity, "Disable the severity filter");
  app.add_flag("-q,--quiet", f.quiet, "Only log warnings and errors");

  ReportFlags report;
  const auto add_report_flags = [&report](CLI::App* sub) {
    sub->add_option("--report", report.file, "Report as a JSON object or a CSV file");
    sub->add_option("--report-id", report.id, "Report id in --report or in the ingested corpus");
    sub->add_option("--title", report.title);
    sub->add_option("--description", report.description);
    sub->add_option("--product", report.product);
    sub->add_option("--component", report.component);
    sub->add_option("--priority", report.priority, "P1..P5 or 1..5");
    sub->add_option("--severity", report.severity, "blocker..enhancement or 1..7");
    sub->add_option("--created", report.created, "Report creation time (ISO-8601)");
  };

  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and filter the dataset; write corpus and statistics");
  auto* train_cmd = app.add_subcommand("train", "Train the selected backend on the chronological train split");
  auto* recommend_cmd = app.add_subcommand("recommend", "Recommend developers for one report");
  add_report_flags(recommend_cmd);
  recommend_cmd->add_option("--as-of", report.as_of, "Recommendation time (default: report creation time)");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the test split and write metrics and tables");
  auto* assign_cmd = app.add_subcommand("assign", "Record that a developer fixed a report");
  add_report_flags(assign_cmd);
  std::string developer;
  assign_cmd->add_option("--developer", developer, "Developer id")->required();
  auto* synth_cmd = app.add_subcommand("synth", "Write the planted synthetic project as CSV");
  std::string synth_output;
  std::size_t per_developer = 100, noise = 30;
  synth_cmd->add_option("-o,--output", synth_output, "Output CSV (default stdout)");
  synth_cmd->add_option("--reports-per-developer", per_developer)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("bugtriage", sink);
  log->set_pattern("bugtriage %l: %v");
  log->set_level(f.quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    Context ctx{resolve_config(app, f), out, log};
    if (*ingest_cmd) return cmd_ingest(ctx);
    if (*train_cmd) return cmd_train(ctx);
    if (*recommend_cmd) return cmd_recommend(ctx, report);
    if (*evaluate_cmd) return cmd_evaluate(ctx);
    if (*assign_cmd) return cmd_assign(ctx, report, developer);
    if (*synth_cmd) return cmd_synth(ctx, synth_output, per_developer, noise);
    return 1;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return exit_code_for(e);
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace bugtriage::cli
