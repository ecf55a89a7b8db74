#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bugtriage/clustering.hpp"
#include "bugtriage/common.hpp"
#include "bugtriage/corpus.hpp"
#include "bugtriage/ctfidf.hpp"
#include "bugtriage/embedding.hpp"
#include "bugtriage/pca.hpp"
#include "bugtriage/textprep.hpp"

namespace bugtriage::devtopics {

enum class ClustererKind { density, kmeans };

struct DeveloperModelConfig {
  text::TokenPipelineConfig tokens = text::TokenPipelineConfig::defaults();
  EmbeddingProvider embedding;
  bool reduce_dimensions = true;
  std::size_t reduced_dims = 5;
  ClustererKind clusterer = ClustererKind::density;
  std::size_t min_cluster_size = 5;
  std::size_t min_samples = 5;
  std::size_t kmeans_k = 10;
  std::size_t min_reports = 1;
  std::size_t target_topics = 10;
  std::size_t small_model_threshold = 300;
  double outlier_threshold = 0.05;
  std::size_t top_n = 10;
  std::uint64_t seed = 42;

  void validate() const;
};

nlohmann::json to_json(const DeveloperModelConfig& cfg);
DeveloperModelConfig developer_model_config_from_json(const nlohmann::json& j);

struct DeveloperTopicModel {
  std::string developer;
  EmbeddingProvider embedding;
  text::TokenPipelineConfig tokens;
  text::Vocabulary vocab;
  std::optional<PcaModel> pca;
  Eigen::MatrixXd coordinates;  // N x r, clustering space
  ClusterAssignment clusters;
  TopicRepresentation topics;
  std::vector<std::string> training_ids;
  std::vector<text::BowVector> training_terms;
  Timestamp fitted_from{};
  Timestamp fitted_to{};
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t num_topics() const { return topics.num_topics(); }
};

/// Modeling tokens of a report: its text through the pipeline followed by the
/// pseudo-tokens prod=, comp=, prio= and sev= (values lowercased, whitespace
/// replaced by '_').
text::TokenList document_tokens(const corpus::BugReport& report, const text::TokenPipelineConfig& cfg);

/// embed -> PCA -> cluster -> c-TF-IDF -> topic reduction -> (small models)
/// outlier reduction. A density clustering without clusters falls back to
/// kmeans with k = max(2, floor(sqrt(N))). Throws InsufficientDataError when
/// there are fewer than cfg.min_reports reports.
DeveloperTopicModel fit_developer_model(const std::string& developer, std::span<const corpus::BugReport> reports,
                                        const DeveloperModelConfig& cfg,
                                        const ExternalEmbeddings* external = nullptr);

/// Repeatedly merges the most cosine-similar pair of topics (ties to the
/// smaller id pair) until at most `target` remain. Throws ArgumentError when
/// target is 0.
DeveloperTopicModel reduce_topics(DeveloperTopicModel model, std::size_t target = 10);

/// Moves each outlier to its most similar topic when the cosine similarity is
/// at least `threshold`, then recomputes the representation once.
DeveloperTopicModel reduce_outliers(DeveloperTopicModel model, double threshold = 0.05);

/// Report term counts weighted by the model's class idf factor.
Eigen::VectorXd weighted_terms(const DeveloperTopicModel& model, std::span<const std::string> tokens);

/// Best cosine similarity between the report and any topic, in [0, 1].
double score_document(const DeveloperTopicModel& model, const corpus::BugReport& report);
double score_tokens(const DeveloperTopicModel& model, std::span<const std::string> tokens);

nlohmann::json to_json(const DeveloperTopicModel& model);
DeveloperTopicModel developer_model_from_json(const nlohmann::json& j);

struct ModelIndexEntry {
  std::string developer;
  std::string file;  // relative to the models directory
  std::size_t report_count = 0;
  std::size_t topic_count = 0;
  std::size_t outlier_count = 0;
  Timestamp fitted_from{};
  Timestamp fitted_to{};
};

struct ModelIndex {
  std::vector<ModelIndexEntry> entries;  // sorted by developer
  nlohmann::json metadata;               // seed, config hash, ...

  const ModelIndexEntry* find(std::string_view developer) const;
};

/// Filesystem-safe "<developer>.model"; ids with characters outside
/// [A-Za-z0-9._@+-] are sanitized and suffixed with a hash.
std::string model_file_name(std::string_view developer);

void save_model(const std::filesystem::path& path, const DeveloperTopicModel& model);
/// Throws MissingArtifactError for a missing file, DataError for a corrupt one.
DeveloperTopicModel load_model(const std::filesystem::path& path);

inline constexpr const char* kModelIndexFile = "index.json";

nlohmann::json to_json(const ModelIndex& index);
ModelIndex model_index_from_json(const nlohmann::json& j);
void save_model_index(const std::filesystem::path& models_dir, const ModelIndex& index);
ModelIndex load_model_index(const std::filesystem::path& models_dir);
ModelIndexEntry index_entry(const DeveloperTopicModel& model);

}  // namespace bugtriage::devtopics
