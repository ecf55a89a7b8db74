#include "bugtriage/ctfidf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bugtriage/common.hpp"

namespace bugtriage::devtopics {

std::vector<std::string> top_terms(const Eigen::Ref<const Eigen::RowVectorXd>& weights, const text::Vocabulary& vocab,
                                   std::size_t n) {
  std::vector<std::size_t> idx;
  for (Eigen::Index t = 0; t < weights.size(); ++t) {
    if (weights(t) > 0.0) idx.push_back(static_cast<std::size_t>(t));
  }
  // Vocabulary indices are in lexicographic token order.
  const std::size_t keep = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double wa = weights(static_cast<Eigen::Index>(a));
                      const double wb = weights(static_cast<Eigen::Index>(b));
                      if (wa != wb) return wa > wb;
                      return a < b;
                    });
  std::vector<std::string> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(vocab.token(idx[i]));
  return out;
}

TopicRepresentation ctfidf_from_counts(Eigen::MatrixXd term_counts, std::vector<std::size_t> sizes,
                                       const text::Vocabulary& vocab, std::size_t top_n) {
  if (term_counts.rows() == 0) throw ArgumentError("ctfidf: no topics");
  if (term_counts.cols() != static_cast<Eigen::Index>(vocab.size())) throw ArgumentError("ctfidf: vocabulary mismatch");
  if (sizes.size() != static_cast<std::size_t>(term_counts.rows())) throw ArgumentError("ctfidf: size count mismatch");

  TopicRepresentation rep;
  rep.top_n = top_n;
  rep.sizes = std::move(sizes);
  rep.mean_class_tokens = term_counts.sum() / static_cast<double>(term_counts.rows());
  const Eigen::RowVectorXd f = term_counts.colwise().sum();
  rep.class_idf.resize(f.size());
  for (Eigen::Index t = 0; t < f.size(); ++t) {
    rep.class_idf(t) = f(t) > 0.0 ? std::log(1.0 + rep.mean_class_tokens / f(t)) : 0.0;
  }
  rep.weights = term_counts.array().rowwise() * rep.class_idf.transpose().array();
  rep.term_counts = std::move(term_counts);
  for (Eigen::Index c = 0; c < rep.weights.rows(); ++c) rep.top_words.push_back(top_terms(rep.weights.row(c), vocab, top_n));
  return rep;
}

TopicRepresentation ctfidf(std::span<const int> labels, std::span<const text::BowVector> docs,
                           const text::Vocabulary& vocab, std::size_t top_n) {
  if (labels.size() != docs.size()) throw ArgumentError("ctfidf: label count differs from document count");
  const int max_label = labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
  if (max_label < 0) throw ArgumentError("ctfidf: no non-outlier cluster");

  const auto C = static_cast<Eigen::Index>(max_label + 1);
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(C, static_cast<Eigen::Index>(vocab.size()));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(C), 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (labels[d] < 0) continue;
    ++sizes[static_cast<std::size_t>(labels[d])];
    for (const auto& [w, n] : docs[d].counts) tf(labels[d], static_cast<Eigen::Index>(w)) += static_cast<double>(n);
  }
  return ctfidf_from_counts(std::move(tf), std::move(sizes), vocab, top_n);
}

nlohmann::json to_json(const TopicRepresentation& rep) {
  // Term counts are integral and sparse; weights are derived on load.
  nlohmann::json topics = nlohmann::json::array();
  for (Eigen::Index c = 0; c < rep.term_counts.rows(); ++c) {
    nlohmann::json terms = nlohmann::json::array();
    for (Eigen::Index t = 0; t < rep.term_counts.cols(); ++t) {
      if (rep.term_counts(c, t) != 0.0) terms.push_back({t, rep.term_counts(c, t)});
    }
    topics.push_back({{"size", rep.sizes[static_cast<std::size_t>(c)]},
                      {"top_words", rep.top_words[static_cast<std::size_t>(c)]},
                      {"term_counts", terms}});
  }
  return {{"top_n", rep.top_n}, {"topics", topics}};
}

TopicRepresentation topic_representation_from_json(const nlohmann::json& j, const text::Vocabulary& vocab) {
  const auto& topics = j.at("topics");
  Eigen::MatrixXd tf = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(topics.size()),
                                             static_cast<Eigen::Index>(vocab.size()));
  std::vector<std::size_t> sizes;
  for (std::size_t c = 0; c < topics.size(); ++c) {
    sizes.push_back(topics[c].at("size").get<std::size_t>());
    for (const auto& entry : topics[c].at("term_counts")) {
      const auto t = entry.at(0).get<std::size_t>();
      if (t >= vocab.size()) throw DataError("topic representation: term index out of range");
      tf(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = entry.at(1).get<double>();
    }
  }
  return ctfidf_from_counts(std::move(tf), std::move(sizes), vocab, j.at("top_n").get<std::size_t>());
}

}  // namespace bugtriage::devtopics
