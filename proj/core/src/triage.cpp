#include "bugtriage/triage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace bugtriage::triage {

namespace {

nlohmann::json time_json(const std::optional<Timestamp>& t) {
  return t ? nlohmann::json(format_timestamp(*t)) : nlohmann::json(nullptr);
}

bool passes(const profiles::DeveloperProfile& p, const RecommendationRequest& req, int window_days) {
  const auto& r = req.report;
  if (req.filters.date && !profiles::is_active(p, req.effective_as_of(), window_days)) return false;
  // Experience at the report's urgency in one dimension only: the other rank
  // is pinned to its least urgent value so it cannot satisfy the predicate.
  if (req.filters.priority && profiles::experience(p, r.priority, 0) == 0) return false;
  if (req.filters.severity && profiles::experience(p, 0, r.severity) == 0) return false;
  return true;
}

}  // namespace

std::string to_string(FallbackLevel level) {
  switch (level) {
    case FallbackLevel::none:
      return "none";
    case FallbackLevel::widened_window:
      return "widened_window";
    case FallbackLevel::all_developers:
      return "all_developers";
  }
  return "none";
}

nlohmann::json to_json(const RecommendationResult& r) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : r.results) {
    results.push_back({{"developer", e.developer},
                       {"score", e.score},
                       {"last_active", time_json(e.last_active)},
                       {"tie_break_used", e.tie_break_used}});
  }
  return {{"report_id", r.report_id},
          {"as_of", format_timestamp(r.as_of)},
          {"k", r.k},
          {"results", results},
          {"pool_size", r.pool_size},
          {"fallback_level", to_string(r.fallback)},
          {"filters_applied", {{"date", r.filters.date}, {"priority", r.filters.priority}, {"severity", r.filters.severity}}}};
}

nlohmann::json to_json(const MtmBundle& b) {
  return {{"format", "bugtriage-mtm"}, {"model", topics::to_json(b.model)}, {"vocabulary", b.vocab.to_json()},
          {"tokens", text::to_json(b.tokens)}};
}

MtmBundle mtm_bundle_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "bugtriage-mtm") throw DataError("not an mtm artifact");
    MtmBundle b;
    b.model = topics::mtm_from_json(j.at("model"));
    b.vocab = text::Vocabulary::from_json(j.at("vocabulary"));
    b.tokens = text::token_config_from_json(j.at("tokens"));
    if (b.vocab.size() != b.model.lda.vocab_size) throw DataError("mtm vocabulary size mismatch");
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mtm artifact: ") + e.what());
  }
}

MtmBundle train_mtm(std::span<const corpus::BugReport> reports, const text::TokenPipelineConfig& tokens,
                    const MtmTrainConfig& cfg) {
  if (reports.empty()) throw InsufficientDataError("mtm: no training reports");
  if (cfg.num_topics == 0) throw ArgumentError("mtm: number of topics must be positive");
  std::vector<text::TokenList> docs;
  docs.reserve(reports.size());
  for (const auto& r : reports) docs.push_back(text::tokenize(r.text(), tokens));
  MtmBundle b;
  b.tokens = tokens;
  b.vocab = text::build_vocabulary(docs);
  std::vector<topics::MtmDocument> mdocs;
  mdocs.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    mdocs.push_back({text::to_indices(docs[i], b.vocab), reports[i].combination().key(), reports[i].assignee});
  }
  auto priors = topics::LdaPriors::defaults(cfg.num_topics);
  if (cfg.alpha) priors.alpha = *cfg.alpha;
  priors.beta = cfg.beta;
  b.model = topics::mtm_train(std::move(mdocs), cfg.num_topics, b.vocab.size(), priors, cfg.seed, cfg.iterations);
  return b;
}

std::vector<topics::RankedDeveloper> mtm_rank(const MtmBundle& mtm, const corpus::BugReport& report,
                                              std::size_t fold_in_sweeps) {
  const auto tokens = text::tokenize(report.text(), mtm.tokens);
  const auto idx = text::to_indices(tokens, mtm.vocab);
  const auto inf = topics::mtm_fold_in(mtm.model, idx, report.combination().key(), fold_in_sweeps);
  return topics::mtm_scores(mtm.model, inf.theta);
}

void ModelStore::put(std::shared_ptr<const devtopics::DeveloperTopicModel> model) {
  if (!model) throw ArgumentError("model store: null model");
  models_[model->developer] = std::move(model);
}

const devtopics::DeveloperTopicModel* ModelStore::find(const std::string& developer) const {
  auto it = models_.find(developer);
  return it == models_.end() ? nullptr : it->second.get();
}

std::vector<std::string> ModelStore::developers() const {
  std::vector<std::string> out;
  for (const auto& [d, _] : models_) out.push_back(d);
  return out;
}

ModelStore ModelStore::load(const std::filesystem::path& models_dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(models_dir, ec)) {
    throw MissingArtifactError("models directory not found: " + models_dir.string());
  }
  ModelStore store;
  const auto index = devtopics::load_model_index(models_dir);
  for (const auto& e : index.entries) {
    auto m = std::make_shared<devtopics::DeveloperTopicModel>(devtopics::load_model(models_dir / e.file));
    if (m->developer != e.developer) throw DataError("model file " + e.file + " belongs to " + m->developer);
    store.put(std::move(m));
  }
  if (std::filesystem::is_regular_file(models_dir / kMtmFile, ec)) {
    try {
      store.set_mtm(std::make_shared<const MtmBundle>(
          mtm_bundle_from_json(nlohmann::json::parse(read_file(models_dir / kMtmFile)))));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("mtm artifact: " + std::string(e.what()));
    }
  }
  return store;
}

CandidatePool filter_candidates(const profiles::ProfileMap& profiles, const RecommendationRequest& request,
                                const TriageConfig& cfg) {
  CandidatePool pool;
  for (const auto& [name, p] : profiles) {
    if (passes(p, request, cfg.window_days)) pool.developers.push_back(name);
  }
  if (!pool.developers.empty()) return pool;

  pool.fallback = FallbackLevel::widened_window;
  for (const auto& [name, p] : profiles) {
    if (profiles::is_active(p, request.effective_as_of(), 2 * cfg.window_days)) pool.developers.push_back(name);
  }
  if (!pool.developers.empty()) return pool;

  pool.fallback = FallbackLevel::all_developers;
  for (const auto& [name, _] : profiles) pool.developers.push_back(name);
  return pool;
}

std::map<std::string, double> score_candidates(std::span<const std::string> candidates, const corpus::BugReport& report,
                                               const ModelStore& store, const TriageConfig& cfg) {
  std::map<std::string, double> out;
  std::optional<std::map<std::string, double>> mtm_scores;
  for (const auto& dev : candidates) {
    if (const auto* m = store.find(dev)) {
      out[dev] = devtopics::score_document(*m, report);
      continue;
    }
    double s = 0.0;
    if (const auto* mtm = store.mtm(); mtm && !mtm->model.developers.empty()) {
      if (!mtm_scores) {
        mtm_scores.emplace();
        for (const auto& r : mtm_rank(*mtm, report, cfg.mtm_fold_in_sweeps)) (*mtm_scores)[r.developer] = r.score;
      }
      if (auto it = mtm_scores->find(dev); it != mtm_scores->end()) s = it->second;
    }
    out[dev] = s;
  }
  return out;
}

std::vector<RankedDeveloper> rank_scores(const std::map<std::string, double>& scores,
                                         const profiles::ProfileMap& profiles, Timestamp as_of, double tie_epsilon) {
  std::vector<RankedDeveloper> ranked;
  ranked.reserve(scores.size());
  for (const auto& [dev, s] : scores) {
    RankedDeveloper r{dev, s, std::nullopt, false};
    if (auto it = profiles.find(dev); it != profiles.end()) r.last_active = profiles::last_active_before(it->second, as_of);
    ranked.push_back(std::move(r));
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedDeveloper& a, const RankedDeveloper& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.developer < b.developer;
  });
  std::size_t begin = 0;
  while (begin < ranked.size()) {
    std::size_t end = begin + 1;
    while (end < ranked.size() && std::abs(ranked[end - 1].score - ranked[end].score) < tie_epsilon) ++end;
    if (end - begin > 1) {
      const auto first = ranked.begin() + static_cast<std::ptrdiff_t>(begin);
      const auto last = ranked.begin() + static_cast<std::ptrdiff_t>(end);
      const bool activity_differs = std::any_of(first, last, [&](const RankedDeveloper& r) {
        return r.last_active != first->last_active;
      });
      std::stable_sort(first, last, [](const RankedDeveloper& a, const RankedDeveloper& b) {
        if (a.last_active != b.last_active) return a.last_active > b.last_active;  // nullopt sorts last
        return a.developer < b.developer;
      });
      if (activity_differs) {
        for (auto it = first; it != last; ++it) it->tie_break_used = true;
      }
    }
    begin = end;
  }
  return ranked;
}

RecommendationResult recommend(const RecommendationRequest& request, const profiles::ProfileMap& profiles,
                               const ModelStore& store, const TriageConfig& cfg) {
  if (request.k == 0) throw ArgumentError("recommend: k must be at least 1");
  if (profiles.empty()) throw InsufficientDataError("recommend: no developer profiles");
  RecommendationResult out;
  out.report_id = request.report.id;
  out.as_of = request.effective_as_of();
  out.k = request.k;
  out.filters = request.filters;
  const auto pool = filter_candidates(profiles, request, cfg);
  out.pool_size = pool.developers.size();
  out.fallback = pool.fallback;
  const auto scores = score_candidates(pool.developers, request.report, store, cfg);
  out.results = rank_scores(scores, profiles, out.as_of, cfg.tie_epsilon);
  if (out.results.size() > request.k) out.results.resize(request.k);
  return out;
}

nlohmann::json to_json(const TriageState& s) {
  nlohmann::json assignments = nlohmann::json::array();
  for (const auto& [report, dev] : s.assignments) assignments.push_back({{"report_id", report}, {"developer", dev}});
  return {{"format", "bugtriage-state"},
          {"profiles", profiles::to_json(s.profiles)},
          {"pending", s.pending},
          {"stale", s.stale},
          {"assignments", assignments}};
}

TriageState triage_state_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "bugtriage-state") throw DataError("not a triage state file");
    TriageState s;
    s.profiles = profiles::profiles_from_json(j.at("profiles"));
    s.pending = j.at("pending").get<std::map<std::string, std::size_t>>();
    s.stale = j.at("stale").get<std::set<std::string>>();
    for (const auto& a : j.at("assignments")) {
      s.assignments.emplace_back(a.at("report_id").get<std::string>(), a.at("developer").get<std::string>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("triage state: ") + e.what());
  }
}

TriageState assign(const corpus::BugReport& report, const std::string& developer, const TriageState& state,
                   const TriageConfig& cfg) {
  if (developer.empty()) throw ArgumentError("assign: empty developer id");
  TriageState next = state;
  auto& p = next.profiles[developer];
  p.name = developer;
  p.add(report);
  const std::size_t pending = ++next.pending[developer];
  if (pending >= cfg.refit_threshold) next.stale.insert(developer);
  next.assignments.emplace_back(report.id, developer);
  if (state.mtm) {
    auto updated = std::make_shared<MtmBundle>(*state.mtm);
    const auto tokens = text::tokenize(report.text(), updated->tokens);
    const auto idx = text::to_indices(tokens, updated->vocab);
    topics::mtm_update(updated->model, idx, report.combination().key(), developer, cfg.mtm_fold_in_sweeps);
    next.mtm = std::move(updated);
  }
  return next;
}

TriageService::TriageService(TriageState state, ModelStore store, TriageConfig cfg)
    : state_(std::make_shared<const TriageState>(std::move(state))), store_(std::move(store)), cfg_(cfg) {}

std::shared_ptr<const TriageState> TriageService::snapshot() const {
  std::lock_guard lock(read_mutex_);
  return state_;
}

RecommendationResult TriageService::recommend(const RecommendationRequest& request) const {
  const auto snap = snapshot();
  if (!snap->mtm) return triage::recommend(request, snap->profiles, store_, cfg_);
  ModelStore store = store_;
  store.set_mtm(snap->mtm);
  return triage::recommend(request, snap->profiles, store, cfg_);
}

std::shared_ptr<const TriageState> TriageService::assign(const corpus::BugReport& report, const std::string& developer) {
  std::lock_guard writer(write_mutex_);
  auto next = std::make_shared<const TriageState>(triage::assign(report, developer, *snapshot(), cfg_));
  std::lock_guard lock(read_mutex_);
  state_ = next;
  return next;
}

std::vector<devtopics::DeveloperTopicModel> fit_developer_models(
    const std::map<std::string, std::vector<corpus::BugReport>>& reports_by_developer,
    const devtopics::DeveloperModelConfig& cfg, std::size_t jobs, const devtopics::ExternalEmbeddings* external) {
  std::vector<const std::pair<const std::string, std::vector<corpus::BugReport>>*> work;
  for (const auto& entry : reports_by_developer) work.push_back(&entry);
  std::vector<std::optional<devtopics::DeveloperTopicModel>> slots(work.size());
  std::vector<std::exception_ptr> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      try {
        slots[i] = devtopics::fit_developer_model(work[i]->first, work[i]->second, cfg, external);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(work.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<devtopics::DeveloperTopicModel> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace bugtriage::triage
