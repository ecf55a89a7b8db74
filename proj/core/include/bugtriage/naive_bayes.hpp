#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bugtriage/lda.hpp"
#include "bugtriage/textprep.hpp"

namespace bugtriage::topics {

struct LabeledDocument {
  std::string label;
  text::TokenList tokens;
};

struct ClassScore {
  std::string label;
  double log_posterior = 0.0;  // log prior + sum of token log likelihoods (unnormalized)
};

/// Multinomial Naive Bayes with Laplace smoothing over the training
/// vocabulary. Classes are kept in lexicographic order.
class NaiveBayesClassifier {
 public:
  /// Throws ArgumentError when there are no documents or lambda <= 0.
  static NaiveBayesClassifier train(std::span<const LabeledDocument> docs, double lambda = 1.0);

  /// Every class, best first; ties broken lexicographically by label. Tokens
  /// outside the training vocabulary are ignored, so an all-OOV document is
  /// ranked by priors alone.
  std::vector<ClassScore> predict(std::span<const std::string> doc) const;

  const std::vector<std::string>& classes() const { return classes_; }
  const Eigen::VectorXd& log_priors() const { return log_priors_; }
  /// classes x vocabulary
  const Eigen::MatrixXd& log_likelihoods() const { return log_likelihoods_; }
  const text::Vocabulary& vocabulary() const { return vocab_; }
  double lambda() const { return lambda_; }

 private:
  std::vector<std::string> classes_;
  Eigen::VectorXd log_priors_;
  Eigen::MatrixXd log_likelihoods_;
  text::Vocabulary vocab_;
  double lambda_ = 1.0;
};

/// The LDA-topics-as-classes track: each document is labeled with its argmax
/// theta topic ("0", "1", ...; ties to the lower topic id) and a classifier is
/// trained on those labels. `docs` must align with the model's documents.
NaiveBayesClassifier train_topic_classifier(const LdaModel& model, std::span<const text::TokenList> docs,
                                            double lambda = 1.0);

}  // namespace bugtriage::topics
