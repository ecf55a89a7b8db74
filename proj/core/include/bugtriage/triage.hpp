#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/common.hpp"
#include "bugtriage/corpus.hpp"
#include "bugtriage/developer_model.hpp"
#include "bugtriage/mtm.hpp"
#include "bugtriage/profiles.hpp"
#include "bugtriage/textprep.hpp"

namespace bugtriage::triage {

struct FilterFlags {
  bool date = true;
  bool priority = true;
  bool severity = true;
};

struct TriageConfig {
  int window_days = profiles::kDefaultWindowDays;
  double tie_epsilon = 1e-6;
  std::size_t refit_threshold = 25;
  std::size_t mtm_fold_in_sweeps = 50;
};

enum class FallbackLevel { none, widened_window, all_developers };
std::string to_string(FallbackLevel level);

struct RecommendationRequest {
  corpus::BugReport report;  // assignee ignored
  std::size_t k = 5;
  std::optional<Timestamp> as_of;  // defaults to report.created_time
  FilterFlags filters;

  Timestamp effective_as_of() const { return as_of.value_or(report.created_time); }
};

struct CandidatePool {
  std::vector<std::string> developers;  // sorted
  FallbackLevel fallback = FallbackLevel::none;
};

struct RankedDeveloper {
  std::string developer;
  double score = 0.0;
  std::optional<Timestamp> last_active;  // latest fixed report not after as_of
  bool tie_break_used = false;
};

struct RecommendationResult {
  std::string report_id;
  Timestamp as_of{};
  std::size_t k = 0;
  std::vector<RankedDeveloper> results;
  std::size_t pool_size = 0;
  FallbackLevel fallback = FallbackLevel::none;
  FilterFlags filters;
};

nlohmann::json to_json(const RecommendationResult& r);

/// LDA-based combination model together with what it needs to read a report.
struct MtmBundle {
  topics::MtmModel model;
  text::Vocabulary vocab;
  text::TokenPipelineConfig tokens = text::TokenPipelineConfig::defaults();
};

nlohmann::json to_json(const MtmBundle& b);
MtmBundle mtm_bundle_from_json(const nlohmann::json& j);

struct MtmTrainConfig {
  std::size_t num_topics = 20;
  std::optional<double> alpha;  // default 50 / K
  double beta = 0.01;
  std::size_t iterations = 500;
  std::uint64_t seed = 42;
};

/// Vocabulary over the reports' text, then collapsed Gibbs training with the
/// combination prior. Throws InsufficientDataError for an empty vocabulary.
MtmBundle train_mtm(std::span<const corpus::BugReport> reports, const text::TokenPipelineConfig& tokens,
                    const MtmTrainConfig& cfg);

/// Scores every developer known to the MTM for one report.
std::vector<topics::RankedDeveloper> mtm_rank(const MtmBundle& mtm, const corpus::BugReport& report,
                                              std::size_t fold_in_sweeps);

/// MTM artifact name inside a models directory.
inline constexpr const char* kMtmFile = "mtm.json";

/// Read-only set of per-developer models plus an optional MTM. Models are
/// shared immutable values, so copies of a store are cheap.
class ModelStore {
 public:
  void put(std::shared_ptr<const devtopics::DeveloperTopicModel> model);
  void set_mtm(std::shared_ptr<const MtmBundle> mtm) { mtm_ = std::move(mtm); }

  const devtopics::DeveloperTopicModel* find(const std::string& developer) const;
  const MtmBundle* mtm() const { return mtm_.get(); }
  std::shared_ptr<const MtmBundle> mtm_ptr() const { return mtm_; }
  std::vector<std::string> developers() const;
  bool empty() const { return models_.empty() && !mtm_; }

  /// Loads every model listed in <dir>/index.json and <dir>/mtm.json when
  /// present. Throws MissingArtifactError when the directory or index is absent.
  static ModelStore load(const std::filesystem::path& models_dir);

 private:
  std::map<std::string, std::shared_ptr<const devtopics::DeveloperTopicModel>> models_;
  std::shared_ptr<const MtmBundle> mtm_;
};

/// Keeps developers passing every enabled filter; an empty pool widens the
/// date window to twice its size, then admits every developer.
CandidatePool filter_candidates(const profiles::ProfileMap& profiles, const RecommendationRequest& request,
                                const TriageConfig& cfg = {});

/// Per-developer model score, else the MTM score when an MTM is loaded, else 0.
std::map<std::string, double> score_candidates(std::span<const std::string> candidates, const corpus::BugReport& report,
                                               const ModelStore& store, const TriageConfig& cfg = {});

/// Sorts by score; runs of scores within tie_epsilon of their neighbour are
/// ordered by most recent activity before as_of, then by id.
std::vector<RankedDeveloper> rank_scores(const std::map<std::string, double>& scores,
                                         const profiles::ProfileMap& profiles, Timestamp as_of,
                                         double tie_epsilon = 1e-6);

/// Throws InsufficientDataError when there are no profiles, ArgumentError when k == 0.
RecommendationResult recommend(const RecommendationRequest& request, const profiles::ProfileMap& profiles,
                               const ModelStore& store, const TriageConfig& cfg = {});

/// Mutable side of triage: profiles, the assignment log since the last
/// training run and which per-developer models are due for a refit.
struct TriageState {
  profiles::ProfileMap profiles;
  std::map<std::string, std::size_t> pending;  // assignments since the model was fitted
  std::set<std::string> stale;
  std::vector<std::pair<std::string, std::string>> assignments;  // (report id, developer)
  std::shared_ptr<const MtmBundle> mtm;                          // updated copy-on-write
};

nlohmann::json to_json(const TriageState& s);  // the MTM is stored separately
TriageState triage_state_from_json(const nlohmann::json& j);

/// Returns the state with the report folded into the developer's profile
/// (created if unknown), the MTM updated and the model marked stale once
/// refit_threshold assignments are pending.
TriageState assign(const corpus::BugReport& report, const std::string& developer, const TriageState& state,
                   const TriageConfig& cfg = {});

/// Single-writer, multi-reader holder. Readers get an immutable snapshot;
/// assignments build a new state and publish it atomically.
class TriageService {
 public:
  TriageService(TriageState state, ModelStore store, TriageConfig cfg = {});

  std::shared_ptr<const TriageState> snapshot() const;
  RecommendationResult recommend(const RecommendationRequest& request) const;
  std::shared_ptr<const TriageState> assign(const corpus::BugReport& report, const std::string& developer);

 private:
  mutable std::mutex read_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const TriageState> state_;
  ModelStore store_;
  TriageConfig cfg_;
};

/// Fits one model per developer on `jobs` worker threads. Output is ordered
/// by developer and independent of `jobs`.
std::vector<devtopics::DeveloperTopicModel> fit_developer_models(
    const std::map<std::string, std::vector<corpus::BugReport>>& reports_by_developer,
    const devtopics::DeveloperModelConfig& cfg, std::size_t jobs = 1,
    const devtopics::ExternalEmbeddings* external = nullptr);

}  // namespace bugtriage::triage
