#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/corpus.hpp"
#include "bugtriage/eval.hpp"

namespace bugtriage::cli {

/// Resolved run configuration: defaults, then the JSON config file, then
/// command-line flags.
struct Config {
  std::vector<std::filesystem::path> datasets;
  corpus::ColumnMap column_map = corpus::ColumnMap::defaults();
  std::string project = "project";
  corpus::FilterConfig filter;
  eval::EvalConfig eval;  // backend, model, mtm, split, k, filters, triage, jobs
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> models_dir;  // default <out>/models
  std::optional<std::filesystem::path> baselines;

  std::filesystem::path resolved_models_dir() const { return models_dir.value_or(out_dir / "models"); }
  std::uint64_t seed() const { return eval.model.seed; }

  /// Everything that influences results apart from the data itself. Dataset
  /// and output locations are left out so every command of one experiment
  /// logs the same hash.
  nlohmann::json experiment_json() const;
  std::string hash() const;

  void validate() const;
};

/// Applies a config document on top of `base`. Unknown keys are rejected.
Config apply_config_json(Config base, const nlohmann::json& j, const std::filesystem::path& relative_to = {});
Config load_config_file(const std::filesystem::path& path, Config base = {});

}  // namespace bugtriage::cli
