#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/common.hpp"
#include "bugtriage/corpus.hpp"
#include "bugtriage/developer_model.hpp"
#include "bugtriage/profiles.hpp"
#include "bugtriage/triage.hpp"

namespace bugtriage::eval {

/// A metric was requested over an empty record set.
struct UndefinedMetricError : std::domain_error {
  using std::domain_error::domain_error;
};

struct EvalRecord {
  std::string report_id;
  std::string true_developer;
  Timestamp created_time{};
  std::vector<std::string> recommended;
  std::optional<std::size_t> hit_rank;  // 1-based position of the true developer
};

double topk_accuracy(std::span<const EvalRecord> records, std::size_t k);
/// hits / N
double recall(std::span<const EvalRecord> records, std::size_t k);
/// hits / (k * N)
double precision(std::span<const EvalRecord> records, std::size_t k);

enum class Backend { per_developer, mtm, both };
std::string to_string(Backend b);
Backend backend_from_string(std::string_view s);

enum class SplitMode { global, per_developer };

struct EvalConfig {
  std::string project = "project";
  double split_ratio = 0.8;
  SplitMode split_mode = SplitMode::global;
  std::size_t max_k = 5;
  bool online_update = false;
  Backend backend = Backend::per_developer;
  triage::FilterFlags filters;
  triage::TriageConfig triage;
  devtopics::DeveloperModelConfig model;
  triage::MtmTrainConfig mtm;
  std::size_t jobs = 1;
};

struct LeakageAudit {
  std::optional<Timestamp> max_train_time;  // latest report of the train split
  std::size_t checked = 0;
  std::vector<std::string> violations;  // report ids older than the newest report the models had seen

  bool ok() const { return violations.empty(); }
};

struct EvalRun {
  std::string project;
  std::string system;
  double split_ratio = 0.8;
  std::vector<std::size_t> ks;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<EvalRecord> records;
  std::map<std::size_t, double> top_k;
  std::map<std::size_t, double> precision;
  std::map<std::size_t, double> recall;
  LeakageAudit audit;
  nlohmann::json metadata;  // seed, config hash
  double duration_seconds = 0.0;  // wall clock; kept out of the JSON form
};

struct PreparedSplit {
  std::vector<corpus::BugReport> train;
  std::vector<corpus::BugReport> test;  // chronological
};

/// Train/test partition of a filtered corpus; the test side is always
/// returned in (created_time, id) order.
PreparedSplit prepare_split(std::span<const corpus::BugReport> reports, double ratio, SplitMode mode);

/// Scores the test reports against already trained artifacts. Each report is
/// recommended with as_of = its creation time and with its assignee hidden;
/// with online_update the true assignee is folded in afterwards.
EvalRun evaluate_prepared(const PreparedSplit& split, const triage::ModelStore& store, const EvalConfig& cfg);

/// Trains the configured backend on the train split, then evaluate_prepared.
/// Throws InsufficientDataError when the test split is empty.
EvalRun evaluate(std::span<const corpus::BugReport> reports, const EvalConfig& cfg);

/// Trains the configured backend on `train`.
triage::ModelStore train_store(std::span<const corpus::BugReport> train, const EvalConfig& cfg);

/// Fills top_k, precision and recall for ks 1..max_k.
void compute_metrics(EvalRun& run, std::size_t max_k);

nlohmann::json to_json(const EvalRun& run);
EvalRun eval_run_from_json(const nlohmann::json& j);

struct Baseline {
  std::string system;
  std::string project;
  std::size_t k = 1;
  double value = 0.0;
};

/// CSV with header system,project,k,value.
std::vector<Baseline> load_baselines(const std::filesystem::path& path);
std::vector<Baseline> parse_baselines(std::string_view text);

struct Tables {
  std::string markdown;
  std::string csv;
};

/// Per-run Top-1..Top-k summary plus, for each k, a project x system
/// comparison with an Average row (mean of the cells present in a column).
/// Baseline columns are labelled as published results.
Tables report_table(std::span<const EvalRun> runs, std::span<const Baseline> baselines,
                    std::span<const std::size_t> comparison_ks = {});

/// Two-decimal rendering used in the tables.
std::string format_metric(double v);

}  // namespace bugtriage::eval
