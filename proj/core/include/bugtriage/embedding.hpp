#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bugtriage/textprep.hpp"

namespace bugtriage::devtopics {

enum class EmbeddingKind { tfidf_lsa, external_file };

struct EmbeddingProvider {
  EmbeddingKind kind = EmbeddingKind::tfidf_lsa;
  std::size_t dims = 32;        // tfidf_lsa output dimension
  std::filesystem::path path;   // external_file source
};

/// Precomputed document vectors keyed by document id, loaded from a CSV whose
/// first column is the id and the remaining columns the vector. A header row
/// is recognised by a non-numeric second cell.
class ExternalEmbeddings {
 public:
  /// Throws DataError naming the offending id on ragged rows or non-finite
  /// values, MissingArtifactError when the file is absent.
  static ExternalEmbeddings load(const std::filesystem::path& path);

  std::size_t dims() const { return dims_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<double>* find(const std::string& id) const;

 private:
  std::size_t dims_ = 0;
  std::unordered_map<std::string, std::vector<double>> rows_;
};

/// TF-IDF rows projected onto their top principal axes. When the corpus
/// supports fewer than `dims` axes the remaining columns are zero.
Eigen::MatrixXd embed_tfidf_lsa(std::span<const text::BowVector> bows, const text::Vocabulary& vocab,
                                std::size_t dims);

/// Rows looked up by document id. Throws DataError naming a missing id.
Eigen::MatrixXd embed_external(std::span<const std::string> doc_ids, const ExternalEmbeddings& table);

/// Dispatches on provider.kind; `table` is required for external_file.
Eigen::MatrixXd embed(std::span<const std::string> doc_ids, std::span<const text::BowVector> bows,
                      const text::Vocabulary& vocab, const EmbeddingProvider& provider,
                      const ExternalEmbeddings* table = nullptr);

nlohmann::json to_json(const EmbeddingProvider& p);
EmbeddingProvider embedding_provider_from_json(const nlohmann::json& j);

}  // namespace bugtriage::devtopics
