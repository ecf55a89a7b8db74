#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "bugtriage/common.hpp"

namespace bugtriage::topics {

using TokenSeq = std::vector<std::uint32_t>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using ProbMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LdaPriors {
  double alpha = 0.0;  // symmetric document-topic prior
  double beta = 0.01;  // symmetric topic-word prior

  /// alpha = 50 / K, beta = 0.01
  static LdaPriors defaults(std::size_t num_topics);
};

/// Collapsed-Gibbs LDA state. Counts are always consistent with `z`:
/// n_dk(d,k) = #{i : z[d][i] = k}, n_kw(k,w) = #{(d,i) : z = k, w = docs[d][i]},
/// n_k(k) = row sum of n_kw.
struct LdaModel {
  std::size_t num_topics = 0;
  std::size_t vocab_size = 0;
  LdaPriors priors;
  std::uint64_t seed = 0;

  std::vector<TokenSeq> docs;
  std::vector<std::vector<std::uint32_t>> z;
  CountMatrix n_dk;
  CountMatrix n_kw;
  CountVector n_k;

  ProbMatrix theta;  // D x K, filled by estimate()
  ProbMatrix phi;    // K x V, filled by estimate()

  std::size_t sweeps_done = 0;
  std::optional<double> best_log_posterior;
  std::size_t best_sweep = 0;

  Rng rng{0};
};

/// Uniform-random topic per token from the seeded generator. Throws
/// ArgumentError for K == 0 or an out-of-range token, InsufficientDataError
/// for an empty corpus.
LdaModel lda_init(std::vector<TokenSeq> docs, std::size_t num_topics, std::size_t vocab_size,
                  LdaPriors priors, std::uint64_t seed);

/// P(z_i = k | z_-i, w) for token `pos` of document `doc`, with that token's
/// own assignment excluded from the counts. Normalized.
std::vector<double> site_conditional(const LdaModel& model, std::size_t doc, std::size_t pos);

/// One document-major, position-ascending resampling pass.
void gibbs_sweep(LdaModel& model);

/// Joint log p(w, z) with theta and phi integrated out.
double log_posterior(const LdaModel& model);

/// Recomputes n_dk, n_kw and n_k from z.
void rebuild_counts(LdaModel& model);

/// theta(d,k) = (n_dk + alpha) / (len_d + K alpha); phi(k,w) = (n_kw + beta) / (n_k + V beta)
void estimate(LdaModel& model);

/// Runs `iterations` sweeps. Every `checkpoint_every` sweeps (and after the
/// last one) the joint log-posterior is evaluated; the best assignment seen is
/// restored at the end and theta/phi are estimated from it.
void lda_train(LdaModel& model, std::size_t iterations = 500, std::size_t checkpoint_every = 50);

struct Inference {
  std::vector<double> theta;
  CountVector topic_counts;          // per-topic token assignments of the folded-in doc
  std::vector<std::uint32_t> z;      // assignments of in-vocabulary tokens
  bool empty_document = false;       // no in-vocabulary token; theta is uniform
};

/// Gibbs fold-in with the trained word-side counts held fixed. Token indices
/// >= V are dropped. The generator is seeded from `seed` (defaults to the
/// model seed), so repeated calls return identical output.
Inference lda_infer(const LdaModel& model, std::span<const std::uint32_t> doc,
                    std::size_t fold_in_sweeps = 100, std::optional<std::uint64_t> seed = std::nullopt);

nlohmann::json to_json(const LdaModel& model);
LdaModel lda_from_json(const nlohmann::json& j);

}  // namespace bugtriage::topics
