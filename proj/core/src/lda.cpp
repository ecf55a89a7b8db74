#include "bugtriage/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gibbs_detail.hpp"

namespace bugtriage::topics {

LdaPriors LdaPriors::defaults(std::size_t num_topics) {
  if (num_topics == 0) throw ArgumentError("number of topics must be >= 1");
  return {50.0 / static_cast<double>(num_topics), 0.01};
}

namespace detail {

void sweep(LdaModel& m, PriorGroups groups) {
  std::vector<double> weights;
  for (std::size_t d = 0; d < m.docs.size(); ++d) {
    const auto dd = static_cast<Eigen::Index>(d);
    std::int64_t* prior_row = groups.counts
                                  ? groups.counts->row(static_cast<Eigen::Index>(groups.doc_group[d])).data()
                                  : m.n_dk.row(dd).data();
    const auto& doc = m.docs[d];
    auto& zd = m.z[d];
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const std::uint32_t w = doc[i];
      const auto old_k = static_cast<Eigen::Index>(zd[i]);
      --m.n_dk(dd, old_k);
      --m.n_kw(old_k, w);
      --m.n_k(old_k);
      if (groups.counts) --prior_row[old_k];

      conditional_weights(m, prior_row, w, weights);
      const auto new_k = static_cast<Eigen::Index>(m.rng.discrete(weights));

      zd[i] = static_cast<std::uint32_t>(new_k);
      ++m.n_dk(dd, new_k);
      ++m.n_kw(new_k, w);
      ++m.n_k(new_k);
      if (groups.counts) ++prior_row[new_k];
    }
  }
  ++m.sweeps_done;
}

double joint_log_posterior(const LdaModel& m, const CountMatrix& prior) {
  const auto K = static_cast<double>(m.num_topics);
  const auto V = static_cast<double>(m.vocab_size);
  const double alpha = m.priors.alpha;
  const double beta = m.priors.beta;

  double lp = 0.0;
  // word side: prod_k Dir-multinomial(n_kw | beta)
  for (Eigen::Index k = 0; k < m.n_kw.rows(); ++k) {
    lp += std::lgamma(V * beta) - V * std::lgamma(beta);
    for (Eigen::Index w = 0; w < m.n_kw.cols(); ++w) {
      if (m.n_kw(k, w) > 0) lp += std::lgamma(static_cast<double>(m.n_kw(k, w)) + beta) - std::lgamma(beta);
    }
    lp += V * std::lgamma(beta) - std::lgamma(static_cast<double>(m.n_k(k)) + V * beta);
  }
  // document (or group) side: prod_g Dir-multinomial(n_gk | alpha)
  for (Eigen::Index g = 0; g < prior.rows(); ++g) {
    std::int64_t total = 0;
    lp += std::lgamma(K * alpha) - K * std::lgamma(alpha);
    for (Eigen::Index k = 0; k < prior.cols(); ++k) {
      lp += std::lgamma(static_cast<double>(prior(g, k)) + alpha);
      total += prior(g, k);
    }
    lp -= std::lgamma(static_cast<double>(total) + K * alpha);
  }
  return lp;
}

FoldIn fold_in(const LdaModel& m, std::span<const std::uint32_t> doc, std::size_t sweeps,
               std::uint64_t seed, const std::int64_t* extra_prior) {
  const std::size_t K = m.num_topics;
  FoldIn out;
  out.counts = CountVector::Zero(static_cast<Eigen::Index>(K));
  for (auto w : doc) {
    if (w < m.vocab_size) out.z.push_back(w);  // temporarily holds the words
  }
  const std::vector<std::uint32_t> words = std::move(out.z);
  out.z.assign(words.size(), 0);

  Rng rng(seed);
  for (std::size_t i = 0; i < words.size(); ++i) {
    out.z[i] = static_cast<std::uint32_t>(rng.below(K));
    ++out.counts(out.z[i]);
  }
  std::vector<double> weights(K);
  std::vector<std::int64_t> prior(K);
  for (std::size_t s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --out.counts(out.z[i]);
      for (std::size_t k = 0; k < K; ++k) {
        prior[k] = out.counts(static_cast<Eigen::Index>(k)) + (extra_prior ? extra_prior[k] : 0);
      }
      conditional_weights(m, prior.data(), words[i], weights);
      out.z[i] = static_cast<std::uint32_t>(rng.discrete(weights));
      ++out.counts(out.z[i]);
    }
  }
  return out;
}

}  // namespace detail

LdaModel lda_init(std::vector<TokenSeq> docs, std::size_t num_topics, std::size_t vocab_size,
                  LdaPriors priors, std::uint64_t seed) {
  if (num_topics == 0) throw ArgumentError("lda_init: K must be >= 1");
  if (docs.empty()) throw InsufficientDataError("lda_init: empty corpus");
  if (!(priors.alpha > 0.0) || !(priors.beta > 0.0)) throw ArgumentError("lda_init: priors must be positive");
  for (const auto& doc : docs) {
    for (auto w : doc) {
      if (w >= vocab_size) throw ArgumentError("lda_init: token index out of range");
    }
  }

  LdaModel m;
  m.num_topics = num_topics;
  m.vocab_size = vocab_size;
  m.priors = priors;
  m.seed = seed;
  m.rng = Rng(seed);
  m.docs = std::move(docs);
  m.z.resize(m.docs.size());
  for (std::size_t d = 0; d < m.docs.size(); ++d) {
    m.z[d].resize(m.docs[d].size());
    for (auto& k : m.z[d]) k = static_cast<std::uint32_t>(m.rng.below(num_topics));
  }
  rebuild_counts(m);
  return m;
}

void rebuild_counts(LdaModel& m) {
  const auto D = static_cast<Eigen::Index>(m.docs.size());
  const auto K = static_cast<Eigen::Index>(m.num_topics);
  const auto V = static_cast<Eigen::Index>(m.vocab_size);
  m.n_dk = CountMatrix::Zero(D, K);
  m.n_kw = CountMatrix::Zero(K, V);
  m.n_k = CountVector::Zero(K);
  for (Eigen::Index d = 0; d < D; ++d) {
    const auto& doc = m.docs[static_cast<std::size_t>(d)];
    const auto& zd = m.z[static_cast<std::size_t>(d)];
    for (std::size_t i = 0; i < doc.size(); ++i) {
      ++m.n_dk(d, zd[i]);
      ++m.n_kw(zd[i], doc[i]);
      ++m.n_k(zd[i]);
    }
  }
}

std::vector<double> site_conditional(const LdaModel& m, std::size_t doc, std::size_t pos) {
  const std::uint32_t w = m.docs.at(doc).at(pos);
  const auto k_old = static_cast<Eigen::Index>(m.z[doc][pos]);
  const auto dd = static_cast<Eigen::Index>(doc);

  // Same exclusion the sampler performs, applied to a scratch copy.
  LdaModel scratch;
  scratch.num_topics = m.num_topics;
  scratch.vocab_size = m.vocab_size;
  scratch.priors = m.priors;
  scratch.n_kw = m.n_kw;
  scratch.n_k = m.n_k;
  --scratch.n_kw(k_old, w);
  --scratch.n_k(k_old);
  std::vector<std::int64_t> prior(m.n_dk.row(dd).data(), m.n_dk.row(dd).data() + m.num_topics);
  --prior[static_cast<std::size_t>(k_old)];

  std::vector<double> p;
  detail::conditional_weights(scratch, prior.data(), w, p);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

void gibbs_sweep(LdaModel& model) { detail::sweep(model, {}); }

double log_posterior(const LdaModel& model) { return detail::joint_log_posterior(model, model.n_dk); }

void estimate(LdaModel& m) {
  const auto D = static_cast<Eigen::Index>(m.docs.size());
  const auto K = static_cast<Eigen::Index>(m.num_topics);
  const auto V = static_cast<Eigen::Index>(m.vocab_size);
  const double alpha = m.priors.alpha;
  const double beta = m.priors.beta;
  m.theta.resize(D, K);
  for (Eigen::Index d = 0; d < D; ++d) {
    const double denom = static_cast<double>(m.docs[static_cast<std::size_t>(d)].size()) +
                         static_cast<double>(K) * alpha;
    for (Eigen::Index k = 0; k < K; ++k) m.theta(d, k) = (static_cast<double>(m.n_dk(d, k)) + alpha) / denom;
  }
  m.phi.resize(K, V);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double denom = static_cast<double>(m.n_k(k)) + static_cast<double>(V) * beta;
    for (Eigen::Index w = 0; w < V; ++w) m.phi(k, w) = (static_cast<double>(m.n_kw(k, w)) + beta) / denom;
  }
}

void lda_train(LdaModel& m, std::size_t iterations, std::size_t checkpoint_every) {
  if (checkpoint_every == 0) throw ArgumentError("lda_train: checkpoint interval must be positive");
  auto best_z = m.z;
  double best = log_posterior(m);
  std::size_t best_sweep = m.sweeps_done;
  for (std::size_t it = 1; it <= iterations; ++it) {
    gibbs_sweep(m);
    if (it % checkpoint_every == 0 || it == iterations) {
      const double lp = log_posterior(m);
      if (lp > best) {
        best = lp;
        best_z = m.z;
        best_sweep = m.sweeps_done;
      }
    }
  }
  if (best_z != m.z) {
    m.z = std::move(best_z);
    rebuild_counts(m);
  }
  m.best_log_posterior = best;
  m.best_sweep = best_sweep;
  estimate(m);
}

Inference lda_infer(const LdaModel& model, std::span<const std::uint32_t> doc, std::size_t fold_in_sweeps,
                    std::optional<std::uint64_t> seed) {
  const std::size_t K = model.num_topics;
  Inference out;
  auto f = detail::fold_in(model, doc, fold_in_sweeps, seed.value_or(model.seed), nullptr);
  out.z = std::move(f.z);
  out.topic_counts = std::move(f.counts);
  out.theta.resize(K);
  if (out.z.empty()) {
    out.empty_document = true;
    std::fill(out.theta.begin(), out.theta.end(), 1.0 / static_cast<double>(K));
    return out;
  }
  const double denom = static_cast<double>(out.z.size()) + static_cast<double>(K) * model.priors.alpha;
  for (std::size_t k = 0; k < K; ++k) {
    out.theta[k] = (static_cast<double>(out.topic_counts(static_cast<Eigen::Index>(k))) + model.priors.alpha) / denom;
  }
  return out;
}

namespace {

nlohmann::json counts_to_json(const CountMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<std::int64_t>(m.row(r).data(), m.row(r).data() + m.cols()));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const LdaModel& m) {
  nlohmann::json j;
  j["num_topics"] = m.num_topics;
  j["vocab_size"] = m.vocab_size;
  j["alpha"] = m.priors.alpha;
  j["beta"] = m.priors.beta;
  j["seed"] = m.seed;
  j["docs"] = m.docs;
  j["z"] = m.z;
  j["n_kw"] = counts_to_json(m.n_kw);
  j["n_k"] = std::vector<std::int64_t>(m.n_k.data(), m.n_k.data() + m.n_k.size());
  j["sweeps_done"] = m.sweeps_done;
  j["best_log_posterior"] = m.best_log_posterior ? nlohmann::json(*m.best_log_posterior) : nlohmann::json(nullptr);
  j["best_sweep"] = m.best_sweep;
  j["estimated"] = m.phi.size() > 0;
  j["rng_state"] = m.rng.state();
  return j;
}

LdaModel lda_from_json(const nlohmann::json& j) {
  LdaModel m;
  m.num_topics = j.at("num_topics").get<std::size_t>();
  m.vocab_size = j.at("vocab_size").get<std::size_t>();
  m.priors = {j.at("alpha").get<double>(), j.at("beta").get<double>()};
  m.seed = j.at("seed").get<std::uint64_t>();
  m.docs = j.at("docs").get<std::vector<TokenSeq>>();
  m.z = j.at("z").get<std::vector<std::vector<std::uint32_t>>>();
  if (m.z.size() != m.docs.size()) throw DataError("lda model: z/docs length mismatch");
  for (std::size_t d = 0; d < m.docs.size(); ++d) {
    if (m.z[d].size() != m.docs[d].size()) throw DataError("lda model: z/docs length mismatch");
    for (std::size_t i = 0; i < m.docs[d].size(); ++i) {
      if (m.docs[d][i] >= m.vocab_size || m.z[d][i] >= m.num_topics) throw DataError("lda model: index out of range");
    }
  }
  rebuild_counts(m);
  const auto n_kw = j.at("n_kw").get<std::vector<std::vector<std::int64_t>>>();
  const auto n_k = j.at("n_k").get<std::vector<std::int64_t>>();
  bool consistent = n_kw.size() == m.num_topics && n_k.size() == m.num_topics;
  for (std::size_t k = 0; consistent && k < m.num_topics; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    consistent = n_k[k] == m.n_k(kk) && n_kw[k].size() == m.vocab_size &&
                 std::equal(n_kw[k].begin(), n_kw[k].end(), m.n_kw.row(kk).data());
  }
  if (!consistent) throw DataError("lda model: stored counts disagree with assignments");
  m.sweeps_done = j.value("sweeps_done", std::size_t{0});
  if (j.contains("best_log_posterior") && !j.at("best_log_posterior").is_null()) {
    m.best_log_posterior = j.at("best_log_posterior").get<double>();
  }
  m.best_sweep = j.value("best_sweep", std::size_t{0});
  if (j.contains("rng_state")) m.rng.restore(j.at("rng_state").get<std::string>());
  if (j.value("estimated", false)) estimate(m);
  return m;
}

}  // namespace bugtriage::topics
