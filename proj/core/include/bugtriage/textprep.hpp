#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace bugtriage::text {

using TokenList = std::vector<std::string>;

enum class CodeHandling { split_identifiers, drop };

struct TokenPipelineConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool remove_numbers = true;
  std::set<std::string> stopwords;  // lowercase
  std::pair<int, int> ngram_range{1, 1};
  CodeHandling code_handling = CodeHandling::split_identifiers;
  std::size_t min_token_len = 2;

  /// Pipeline with the bundled English stopword list.
  static TokenPipelineConfig defaults();

  void validate() const;
};

/// The bundled English stopword list (one token per line in
/// core/data/stopwords_en.txt).
const std::set<std::string>& default_stopwords();

/// Reads a stopword file: one token per line, blank lines and lines starting
/// with '#' ignored, entries lowercased.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

/// Deterministic tokenization:
///   whitespace split -> identifier handling -> lowercase -> punctuation strip
///   -> drop pure numbers -> drop stopwords -> drop short tokens -> n-grams.
/// N-grams are produced over the surviving unigram sequence and joined with
/// '_', grouped by n ascending.
TokenList tokenize(std::string_view text, const TokenPipelineConfig& cfg);

class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t num_documents() const { return num_documents_; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t document_frequency(std::size_t index) const { return df_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// CSV export with columns token,index,df.
  void write_csv(std::ostream& out) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  /// Builds from already-sorted unique tokens with their document frequencies.
  static Vocabulary from_tokens(std::vector<std::string> sorted_tokens, std::vector<std::size_t> df,
                                std::size_t num_documents);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t num_documents_ = 0;
};

/// Keeps tokens with min_df <= df and df / N <= max_df_fraction; indices are
/// assigned in lexicographic order. Throws ArgumentError for empty docs and
/// InsufficientDataError when no token survives.
Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_df = 1,
                            double max_df_fraction = 1.0);

struct BowVector {
  std::string doc_id;
  std::vector<std::pair<std::size_t, std::size_t>> counts;  // (index, count), index ascending

  std::size_t total() const;
};

BowVector to_bow(std::span<const std::string> doc, const Vocabulary& vocab, std::string doc_id = {});

/// In-vocabulary token indices in document order (OOV dropped).
std::vector<std::uint32_t> to_indices(std::span<const std::string> doc, const Vocabulary& vocab);

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1
std::vector<double> idf_weights(const Vocabulary& vocab);

/// Row-per-document tf * idf weights, each non-zero row L2-normalized.
Eigen::MatrixXd tfidf_matrix(std::span<const BowVector> bows, const Vocabulary& vocab);

nlohmann::json to_json(const TokenPipelineConfig& cfg);
TokenPipelineConfig token_config_from_json(const nlohmann::json& j);

}  // namespace bugtriage::text
