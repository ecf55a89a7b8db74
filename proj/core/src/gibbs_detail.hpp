#pragma once

// Sampler internals shared by the plain LDA and the combination-conditioned
// (MTM) models. The only difference between the two is which count matrix
// supplies the document-side prior term.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "bugtriage/lda.hpp"

namespace bugtriage::topics::detail {

/// Unnormalized collapsed conditional for word `w`:
///   (prior_row[k] + alpha) * (n_kw(k,w) + beta) / (n_k(k) + V beta)
/// All counts must already exclude the site being resampled.
inline void conditional_weights(const LdaModel& m, const std::int64_t* prior_row, std::uint32_t w,
                                std::vector<double>& out) {
  const std::size_t K = m.num_topics;
  const double alpha = m.priors.alpha;
  const double beta = m.priors.beta;
  const double vbeta = static_cast<double>(m.vocab_size) * beta;
  out.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    out[k] = (static_cast<double>(prior_row[k]) + alpha) *
             (static_cast<double>(m.n_kw(kk, w)) + beta) / (static_cast<double>(m.n_k(kk)) + vbeta);
  }
}

/// Prior-side counts: either the model's own n_dk (one group per document)
/// or an external group matrix with a document -> group map.
struct PriorGroups {
  CountMatrix* counts = nullptr;
  std::span<const std::size_t> doc_group;
};

void sweep(LdaModel& m, PriorGroups groups);

/// log p(w, z) where the document side is evaluated over `prior` rows.
double joint_log_posterior(const LdaModel& m, const CountMatrix& prior);

struct FoldIn {
  std::vector<std::uint32_t> z;
  CountVector counts;
};

/// Fold-in of one document against fixed word-side counts. `extra_prior`, when
/// set, is added to the document's own counts in the prior term.
FoldIn fold_in(const LdaModel& m, std::span<const std::uint32_t> doc, std::size_t sweeps,
               std::uint64_t seed, const std::int64_t* extra_prior);

}  // namespace bugtriage::topics::detail
