#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bugtriage/textprep.hpp"

namespace bugtriage::devtopics {

/// Class-based TF-IDF over clusters of documents:
///   W(t, c) = tf(t, c) * ln(1 + A / f(t))
/// where tf is the term count in class c, A the mean token count per class
/// and f(t) the count of t over all classes. Outlier documents are excluded.
struct TopicRepresentation {
  Eigen::MatrixXd term_counts;  // C x V, tf
  Eigen::MatrixXd weights;      // C x V, W >= 0
  Eigen::VectorXd class_idf;    // V, ln(1 + A / f(t)), 0 when f(t) = 0
  double mean_class_tokens = 0.0;
  std::vector<std::size_t> sizes;  // documents per topic
  std::vector<std::vector<std::string>> top_words;
  std::size_t top_n = 10;

  std::size_t num_topics() const { return static_cast<std::size_t>(weights.rows()); }
};

/// labels[i] is the cluster of docs[i] (-1 for outliers); clusters are
/// 0..max(label). Throws ArgumentError when sizes differ or no document has a
/// non-outlier label.
TopicRepresentation ctfidf(std::span<const int> labels, std::span<const text::BowVector> docs,
                           const text::Vocabulary& vocab, std::size_t top_n = 10);

/// Recomputes weights and top words from per-class term counts.
TopicRepresentation ctfidf_from_counts(Eigen::MatrixXd term_counts, std::vector<std::size_t> sizes,
                                       const text::Vocabulary& vocab, std::size_t top_n = 10);

/// The n largest positive weights of a row, ties broken by token order.
std::vector<std::string> top_terms(const Eigen::Ref<const Eigen::RowVectorXd>& weights,
                                   const text::Vocabulary& vocab, std::size_t n);

nlohmann::json to_json(const TopicRepresentation& rep);
TopicRepresentation topic_representation_from_json(const nlohmann::json& j, const text::Vocabulary& vocab);

}  // namespace bugtriage::devtopics
