#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bugtriage/lda.hpp"

namespace bugtriage::topics {

inline constexpr double kMtmSmoothing = 1e-6;

struct MtmDocument {
  TokenSeq tokens;
  std::string combination;  // Combination::key()
  std::string developer;
};

/// LDA whose document-side prior is pooled per (product, component)
/// combination: the sampler uses n_ck, the topic counts of every document
/// sharing the combination, in place of n_dk.
struct MtmModel {
  LdaModel lda;
  std::vector<std::string> combinations;
  std::vector<std::size_t> doc_combination;
  CountMatrix n_ck;
  ProbMatrix theta_c;  // C x K
  std::vector<std::string> developers;
  std::vector<std::size_t> doc_developer;
  ProbMatrix dev_topic_counts;  // developers x K, sum of each fixed report's theta

  std::optional<std::size_t> combination_index(std::string_view key) const;
  std::optional<std::size_t> developer_index(std::string_view id) const;
};

MtmModel mtm_train(std::vector<MtmDocument> docs, std::size_t num_topics, std::size_t vocab_size,
                   LdaPriors priors, std::uint64_t seed, std::size_t iterations = 500,
                   std::size_t checkpoint_every = 50);

void mtm_sweep(MtmModel& model);
std::vector<double> mtm_site_conditional(const MtmModel& model, std::size_t doc, std::size_t pos);
double mtm_log_posterior(const MtmModel& model);

/// Recomputes lda counts and n_ck from z.
void rebuild_counts(MtmModel& model);

/// theta, phi, theta_c and dev_topic_counts from the current counts.
void mtm_estimate(MtmModel& model);

/// Fold-in of a new report. A known combination contributes its n_ck to the
/// prior term; an unknown one leaves the plain symmetric prior.
Inference mtm_fold_in(const MtmModel& model, std::span<const std::uint32_t> doc,
                      std::string_view combination, std::size_t fold_in_sweeps = 100,
                      std::optional<std::uint64_t> seed = std::nullopt);

struct RankedDeveloper {
  std::string developer;
  double score = 0.0;
};

/// score(dev) = sum_t theta[t] (c[dev,t] + eps) / (sum_d c[d,t] + D eps),
/// sorted descending, ties by developer id. Throws InsufficientDataError when
/// the model has no developers.
std::vector<RankedDeveloper> mtm_scores(const MtmModel& model, std::span<const double> theta_new);

std::vector<RankedDeveloper> mtm_recommend(const MtmModel& model, std::span<const std::uint32_t> doc,
                                           std::string_view combination, std::size_t k = 5,
                                           std::size_t fold_in_sweeps = 100);

/// Update phase: the report joins the model with its fold-in assignments
/// (unknown combinations and developers get new rows) and the developer's
/// topic row grows by the report's theta, i.e. by exactly 1 in total mass.
void mtm_update(MtmModel& model, std::span<const std::uint32_t> doc, std::string_view combination,
                std::string_view developer, std::size_t fold_in_sweeps = 100);

nlohmann::json to_json(const MtmModel& model);
MtmModel mtm_from_json(const nlohmann::json& j);

}  // namespace bugtriage::topics
