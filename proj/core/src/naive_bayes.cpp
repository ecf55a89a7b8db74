#include "bugtriage/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bugtriage::topics {

NaiveBayesClassifier NaiveBayesClassifier::train(std::span<const LabeledDocument> docs, double lambda) {
  if (docs.empty()) throw ArgumentError("naive bayes: no training documents");
  if (!(lambda > 0.0)) throw ArgumentError("naive bayes: lambda must be positive");

  std::vector<text::TokenList> token_lists;
  token_lists.reserve(docs.size());
  std::map<std::string, std::size_t> class_docs;
  for (const auto& d : docs) {
    token_lists.push_back(d.tokens);
    ++class_docs[d.label];
  }

  NaiveBayesClassifier nb;
  nb.lambda_ = lambda;
  // A corpus of empty documents still gets a (one-entry) vocabulary so the
  // likelihood matrix is well defined.
  bool any_token = std::any_of(token_lists.begin(), token_lists.end(), [](const auto& t) { return !t.empty(); });
  nb.vocab_ = any_token ? text::build_vocabulary(token_lists)
                        : text::Vocabulary::from_tokens({""}, {0}, docs.size());
  for (const auto& [label, n] : class_docs) nb.classes_.push_back(label);

  const auto C = static_cast<Eigen::Index>(nb.classes_.size());
  const auto V = static_cast<Eigen::Index>(nb.vocab_.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(C, V);
  nb.log_priors_.resize(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    nb.log_priors_(c) = std::log(static_cast<double>(class_docs[nb.classes_[static_cast<std::size_t>(c)]]) /
                                 static_cast<double>(docs.size()));
  }
  for (const auto& d : docs) {
    const auto c = static_cast<Eigen::Index>(
        std::lower_bound(nb.classes_.begin(), nb.classes_.end(), d.label) - nb.classes_.begin());
    for (const auto& tok : d.tokens) {
      if (auto w = nb.vocab_.index_of(tok)) counts(c, static_cast<Eigen::Index>(*w)) += 1.0;
    }
  }
  nb.log_likelihoods_.resize(C, V);
  for (Eigen::Index c = 0; c < C; ++c) {
    const double denom = counts.row(c).sum() + lambda * static_cast<double>(V);
    for (Eigen::Index w = 0; w < V; ++w) nb.log_likelihoods_(c, w) = std::log((counts(c, w) + lambda) / denom);
  }
  return nb;
}

std::vector<ClassScore> NaiveBayesClassifier::predict(std::span<const std::string> doc) const {
  std::vector<ClassScore> out;
  out.reserve(classes_.size());
  std::vector<Eigen::Index> idx;
  for (const auto& tok : doc) {
    if (auto w = vocab_.index_of(tok)) idx.push_back(static_cast<Eigen::Index>(*w));
  }
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto cc = static_cast<Eigen::Index>(c);
    double s = log_priors_(cc);
    for (auto w : idx) s += log_likelihoods_(cc, w);
    out.push_back({classes_[c], s});
  }
  std::sort(out.begin(), out.end(), [](const ClassScore& a, const ClassScore& b) {
    if (a.log_posterior != b.log_posterior) return a.log_posterior > b.log_posterior;
    return a.label < b.label;
  });
  return out;
}

NaiveBayesClassifier train_topic_classifier(const LdaModel& model, std::span<const text::TokenList> docs,
                                            double lambda) {
  if (docs.size() != model.docs.size()) throw ArgumentError("train_topic_classifier: document count mismatch");
  if (model.theta.rows() != static_cast<Eigen::Index>(docs.size())) {
    throw ArgumentError("train_topic_classifier: model has not been estimated");
  }
  std::vector<LabeledDocument> labeled;
  labeled.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Eigen::Index best = 0;
    model.theta.row(static_cast<Eigen::Index>(d)).maxCoeff(&best);
    labeled.push_back({std::to_string(best), docs[d]});
  }
  return NaiveBayesClassifier::train(labeled, lambda);
}

}  // namespace bugtriage::topics
