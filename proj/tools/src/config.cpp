#include "bugtriage_cli/config.hpp"

#include <set>

#include "bugtriage/common.hpp"

namespace bugtriage::cli {

namespace {

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void apply_embedding(devtopics::EmbeddingProvider& e, const nlohmann::json& v, const std::filesystem::path& base) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "tfidf-lsa" || s == "tfidf_lsa") {
      e.kind = devtopics::EmbeddingKind::tfidf_lsa;
    } else if (s.rfind("file:", 0) == 0) {
      e.kind = devtopics::EmbeddingKind::external_file;
      e.path = resolve(s.substr(5), base);
    } else {
      throw ArgumentError("config: embedding must be tfidf-lsa or file:PATH");
    }
    return;
  }
  e = devtopics::embedding_provider_from_json(v);
  if (e.kind == devtopics::EmbeddingKind::external_file) e.path = resolve(e.path, base);
}

void apply_reducer(devtopics::DeveloperModelConfig& m, const nlohmann::json& v) {
  const auto kind = v.is_string() ? v.get<std::string>() : v.at("kind").get<std::string>();
  if (kind == "none") {
    m.reduce_dimensions = false;
  } else if (kind == "pca") {
    m.reduce_dimensions = true;
    if (v.is_object()) m.reduced_dims = v.value("dims", m.reduced_dims);
  } else {
    throw ArgumentError("config: reducer must be pca or none");
  }
}

void apply_clusterer(devtopics::DeveloperModelConfig& m, const nlohmann::json& v) {
  const auto kind = v.is_string() ? v.get<std::string>() : v.at("kind").get<std::string>();
  if (kind == "density") {
    m.clusterer = devtopics::ClustererKind::density;
    if (v.is_object()) {
      m.min_cluster_size = v.value("min_cluster_size", m.min_cluster_size);
      m.min_samples = v.value("min_samples", m.min_samples);
    }
  } else if (kind == "kmeans") {
    m.clusterer = devtopics::ClustererKind::kmeans;
    if (v.is_object()) m.kmeans_k = v.value("k", m.kmeans_k);
  } else {
    throw ArgumentError("config: clusterer must be density or kmeans");
  }
}

}  // namespace

nlohmann::json Config::experiment_json() const {
  const auto& m = eval.model;
  return {{"column_map", column_map.columns},
          {"project", project},
          {"filter",
           {{"min_fixed", filter.min_fixed},
            {"name_blacklist", filter.name_blacklist},
            {"required_resolution", filter.required_resolution}}},
          {"backend", eval::to_string(eval.backend)},
          {"model", devtopics::to_json(m)},
          {"mtm",
           {{"topics", eval.mtm.num_topics},
            {"alpha", eval.mtm.alpha ? nlohmann::json(*eval.mtm.alpha) : nlohmann::json(nullptr)},
            {"beta", eval.mtm.beta},
            {"iterations", eval.mtm.iterations}}},
          {"split", eval.split_ratio},
          {"split_mode", eval.split_mode == eval::SplitMode::global ? "global" : "per_developer"},
          {"k", eval.max_k},
          {"window_days", eval.triage.window_days},
          {"refit_threshold", eval.triage.refit_threshold},
          {"filters", {{"date", eval.filters.date}, {"priority", eval.filters.priority}, {"severity", eval.filters.severity}}},
          {"online_update", eval.online_update},
          {"seed", m.seed}};
}

std::string Config::hash() const { return hex64(fnv1a64(experiment_json().dump())); }

void Config::validate() const {
  filter.validate();
  eval.model.validate();
  if (!(eval.split_ratio > 0.0 && eval.split_ratio < 1.0)) throw ArgumentError("split ratio must be in (0, 1)");
  if (eval.max_k == 0) throw ArgumentError("k must be at least 1");
  if (eval.triage.window_days < 0) throw ArgumentError("window_days must be non-negative");
  if (eval.mtm.num_topics == 0) throw ArgumentError("topics must be at least 1");
  if (eval.mtm.iterations == 0) throw ArgumentError("iterations must be at least 1");
  if (eval.jobs == 0) throw ArgumentError("jobs must be at least 1");
}

Config apply_config_json(Config c, const nlohmann::json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ArgumentError("config: top level must be a JSON object");
  static const std::set<std::string> known = {
      "dataset",       "column_map",  "project",      "filter",           "tokens",
      "backend",       "embedding",   "embedding_dims", "reducer",        "reduced_dims",
      "clusterer",     "topics",      "alpha",        "beta",             "iterations",
      "split",         "split_mode",  "k",            "window_days",      "seed",
      "jobs",          "online_update", "out",        "models_dir",       "baselines",
      "refit_threshold", "filters",   "target_topics", "small_model_threshold", "outlier_threshold",
      "top_n",         "min_model_reports"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ArgumentError("config: unknown key '" + key + "'");
  }
  auto& m = c.eval.model;
  try {
    if (j.contains("dataset")) {
      c.datasets.clear();
      const auto& d = j.at("dataset");
      if (d.is_string()) {
        c.datasets.push_back(resolve(d.get<std::string>(), base));
      } else {
        for (const auto& p : d) c.datasets.push_back(resolve(p.get<std::string>(), base));
      }
    }
    if (j.contains("column_map")) {
      for (const auto& [field, column] : j.at("column_map").items()) c.column_map.columns[field] = column.get<std::string>();
    }
    if (j.contains("project")) c.project = j.at("project").get<std::string>();
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      c.filter.min_fixed = f.value("min_fixed", c.filter.min_fixed);
      c.filter.name_blacklist = f.value("name_blacklist", c.filter.name_blacklist);
      c.filter.required_resolution = f.value("required_resolution", c.filter.required_resolution);
    }
    if (j.contains("tokens")) m.tokens = text::token_config_from_json(j.at("tokens"));
    if (j.contains("backend")) c.eval.backend = eval::backend_from_string(j.at("backend").get<std::string>());
    if (j.contains("embedding")) apply_embedding(m.embedding, j.at("embedding"), base);
    if (j.contains("embedding_dims")) m.embedding.dims = j.at("embedding_dims").get<std::size_t>();
    if (j.contains("reducer")) apply_reducer(m, j.at("reducer"));
    if (j.contains("reduced_dims")) m.reduced_dims = j.at("reduced_dims").get<std::size_t>();
    if (j.contains("clusterer")) apply_clusterer(m, j.at("clusterer"));
    if (j.contains("topics")) c.eval.mtm.num_topics = j.at("topics").get<std::size_t>();
    if (j.contains("alpha")) {
      c.eval.mtm.alpha = j.at("alpha").is_null() ? std::nullopt : std::optional<double>(j.at("alpha").get<double>());
    }
    if (j.contains("beta")) c.eval.mtm.beta = j.at("beta").get<double>();
    if (j.contains("iterations")) c.eval.mtm.iterations = j.at("iterations").get<std::size_t>();
    if (j.contains("split")) c.eval.split_ratio = j.at("split").get<double>();
    if (j.contains("split_mode")) {
      const auto mode = j.at("split_mode").get<std::string>();
      if (mode == "global") {
        c.eval.split_mode = eval::SplitMode::global;
      } else if (mode == "per_developer") {
        c.eval.split_mode = eval::SplitMode::per_developer;
      } else {
        throw ArgumentError("config: split_mode must be global or per_developer");
      }
    }
    if (j.contains("k")) c.eval.max_k = j.at("k").get<std::size_t>();
    if (j.contains("window_days")) c.eval.triage.window_days = j.at("window_days").get<int>();
    if (j.contains("seed")) {
      m.seed = j.at("seed").get<std::uint64_t>();
      c.eval.mtm.seed = m.seed;
    }
    if (j.contains("jobs")) c.eval.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("online_update")) c.eval.online_update = j.at("online_update").get<bool>();
    if (j.contains("out")) c.out_dir = resolve(j.at("out").get<std::string>(), base);
    if (j.contains("models_dir")) c.models_dir = resolve(j.at("models_dir").get<std::string>(), base);
    if (j.contains("baselines")) c.baselines = resolve(j.at("baselines").get<std::string>(), base);
    if (j.contains("refit_threshold")) c.eval.triage.refit_threshold = j.at("refit_threshold").get<std::size_t>();
    if (j.contains("filters")) {
      const auto& f = j.at("filters");
      c.eval.filters.date = f.value("date", c.eval.filters.date);
      c.eval.filters.priority = f.value("priority", c.eval.filters.priority);
      c.eval.filters.severity = f.value("severity", c.eval.filters.severity);
    }
    if (j.contains("target_topics")) m.target_topics = j.at("target_topics").get<std::size_t>();
    if (j.contains("small_model_threshold")) m.small_model_threshold = j.at("small_model_threshold").get<std::size_t>();
    if (j.contains("outlier_threshold")) m.outlier_threshold = j.at("outlier_threshold").get<double>();
    if (j.contains("top_n")) m.top_n = j.at("top_n").get<std::size_t>();
    if (j.contains("min_model_reports")) m.min_reports = j.at("min_model_reports").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("config: ") + e.what());
  }
  c.project = c.project.empty() ? "project" : c.project;
  c.eval.project = c.project;
  return c;
}

Config load_config_file(const std::filesystem::path& path, Config base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const MissingArtifactError&) {
    throw ArgumentError("config file not found: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return apply_config_json(std::move(base), j, path.parent_path());
}

}  // namespace bugtriage::cli
