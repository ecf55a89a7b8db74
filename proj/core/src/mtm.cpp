#include "bugtriage/mtm.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "gibbs_detail.hpp"

namespace bugtriage::topics {

namespace {

std::optional<std::size_t> find_index(const std::vector<std::string>& v, std::string_view key) {
  auto it = std::find(v.begin(), v.end(), key);
  if (it == v.end()) return std::nullopt;
  return static_cast<std::size_t>(it - v.begin());
}

void append_zero_row(CountMatrix& m, std::size_t cols) {
  m.conservativeResize(m.rows() + 1, static_cast<Eigen::Index>(cols));
  m.row(m.rows() - 1).setZero();
}

}  // namespace

std::optional<std::size_t> MtmModel::combination_index(std::string_view key) const {
  return find_index(combinations, key);
}

std::optional<std::size_t> MtmModel::developer_index(std::string_view id) const {
  return find_index(developers, id);
}

void rebuild_counts(MtmModel& m) {
  rebuild_counts(m.lda);
  m.n_ck = CountMatrix::Zero(static_cast<Eigen::Index>(m.combinations.size()),
                             static_cast<Eigen::Index>(m.lda.num_topics));
  for (std::size_t d = 0; d < m.lda.docs.size(); ++d) {
    m.n_ck.row(static_cast<Eigen::Index>(m.doc_combination[d])) += m.lda.n_dk.row(static_cast<Eigen::Index>(d));
  }
}

MtmModel mtm_train(std::vector<MtmDocument> docs, std::size_t num_topics, std::size_t vocab_size,
                   LdaPriors priors, std::uint64_t seed, std::size_t iterations,
                   std::size_t checkpoint_every) {
  if (checkpoint_every == 0) throw ArgumentError("mtm_train: checkpoint interval must be positive");
  MtmModel m;
  std::set<std::string> combos, devs;
  for (const auto& d : docs) {
    combos.insert(d.combination);
    devs.insert(d.developer);
  }
  m.combinations.assign(combos.begin(), combos.end());
  m.developers.assign(devs.begin(), devs.end());

  std::vector<TokenSeq> seqs;
  seqs.reserve(docs.size());
  for (auto& d : docs) {
    m.doc_combination.push_back(*m.combination_index(d.combination));
    m.doc_developer.push_back(*m.developer_index(d.developer));
    seqs.push_back(std::move(d.tokens));
  }
  m.lda = lda_init(std::move(seqs), num_topics, vocab_size, priors, seed);
  rebuild_counts(m);

  auto best_z = m.lda.z;
  double best = mtm_log_posterior(m);
  std::size_t best_sweep = 0;
  for (std::size_t it = 1; it <= iterations; ++it) {
    mtm_sweep(m);
    if (it % checkpoint_every == 0 || it == iterations) {
      const double lp = mtm_log_posterior(m);
      if (lp > best) {
        best = lp;
        best_z = m.lda.z;
        best_sweep = m.lda.sweeps_done;
      }
    }
  }
  if (best_z != m.lda.z) {
    m.lda.z = std::move(best_z);
    rebuild_counts(m);
  }
  m.lda.best_log_posterior = best;
  m.lda.best_sweep = best_sweep;
  mtm_estimate(m);
  return m;
}

void mtm_sweep(MtmModel& m) { detail::sweep(m.lda, {&m.n_ck, m.doc_combination}); }

double mtm_log_posterior(const MtmModel& m) { return detail::joint_log_posterior(m.lda, m.n_ck); }

std::vector<double> mtm_site_conditional(const MtmModel& m, std::size_t doc, std::size_t pos) {
  const auto& lda = m.lda;
  const std::uint32_t w = lda.docs.at(doc).at(pos);
  const auto k_old = static_cast<Eigen::Index>(lda.z[doc][pos]);
  const auto c = static_cast<Eigen::Index>(m.doc_combination.at(doc));

  LdaModel scratch;
  scratch.num_topics = lda.num_topics;
  scratch.vocab_size = lda.vocab_size;
  scratch.priors = lda.priors;
  scratch.n_kw = lda.n_kw;
  scratch.n_k = lda.n_k;
  --scratch.n_kw(k_old, w);
  --scratch.n_k(k_old);
  std::vector<std::int64_t> prior(m.n_ck.row(c).data(), m.n_ck.row(c).data() + lda.num_topics);
  --prior[static_cast<std::size_t>(k_old)];

  std::vector<double> p;
  detail::conditional_weights(scratch, prior.data(), w, p);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

void mtm_estimate(MtmModel& m) {
  estimate(m.lda);
  const auto K = static_cast<Eigen::Index>(m.lda.num_topics);
  const double alpha = m.lda.priors.alpha;
  m.theta_c.resize(m.n_ck.rows(), K);
  for (Eigen::Index c = 0; c < m.n_ck.rows(); ++c) {
    const double denom = static_cast<double>(m.n_ck.row(c).sum()) + static_cast<double>(K) * alpha;
    for (Eigen::Index k = 0; k < K; ++k) m.theta_c(c, k) = (static_cast<double>(m.n_ck(c, k)) + alpha) / denom;
  }
  m.dev_topic_counts = ProbMatrix::Zero(static_cast<Eigen::Index>(m.developers.size()), K);
  for (std::size_t d = 0; d < m.lda.docs.size(); ++d) {
    m.dev_topic_counts.row(static_cast<Eigen::Index>(m.doc_developer[d])) +=
        m.lda.theta.row(static_cast<Eigen::Index>(d));
  }
}

Inference mtm_fold_in(const MtmModel& m, std::span<const std::uint32_t> doc, std::string_view combination,
                      std::size_t fold_in_sweeps, std::optional<std::uint64_t> seed) {
  const std::size_t K = m.lda.num_topics;
  const std::int64_t* extra = nullptr;
  if (auto c = m.combination_index(combination)) extra = m.n_ck.row(static_cast<Eigen::Index>(*c)).data();
  auto f = detail::fold_in(m.lda, doc, fold_in_sweeps, seed.value_or(m.lda.seed), extra);

  Inference out;
  out.z = std::move(f.z);
  out.topic_counts = std::move(f.counts);
  out.theta.resize(K);
  out.empty_document = out.z.empty();
  const double alpha = m.lda.priors.alpha;
  const double denom = static_cast<double>(out.z.size()) + static_cast<double>(K) * alpha;
  for (std::size_t k = 0; k < K; ++k) {
    out.theta[k] = (static_cast<double>(out.topic_counts(static_cast<Eigen::Index>(k))) + alpha) / denom;
  }
  return out;
}

std::vector<RankedDeveloper> mtm_scores(const MtmModel& m, std::span<const double> theta_new) {
  const auto D = static_cast<Eigen::Index>(m.developers.size());
  if (D == 0) throw InsufficientDataError("mtm model has no developers");
  const auto K = m.dev_topic_counts.cols();
  if (static_cast<Eigen::Index>(theta_new.size()) != K) throw ArgumentError("mtm_scores: theta length != K");

  std::vector<double> col_total(static_cast<std::size_t>(K));
  for (Eigen::Index t = 0; t < K; ++t) {
    col_total[static_cast<std::size_t>(t)] = m.dev_topic_counts.col(t).sum() + static_cast<double>(D) * kMtmSmoothing;
  }
  std::vector<RankedDeveloper> out;
  out.reserve(static_cast<std::size_t>(D));
  for (Eigen::Index d = 0; d < D; ++d) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < K; ++t) {
      s += theta_new[static_cast<std::size_t>(t)] * (m.dev_topic_counts(d, t) + kMtmSmoothing) /
           col_total[static_cast<std::size_t>(t)];
    }
    out.push_back({m.developers[static_cast<std::size_t>(d)], s});
  }
  std::sort(out.begin(), out.end(), [](const RankedDeveloper& a, const RankedDeveloper& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.developer < b.developer;
  });
  return out;
}

std::vector<RankedDeveloper> mtm_recommend(const MtmModel& m, std::span<const std::uint32_t> doc,
                                           std::string_view combination, std::size_t k,
                                           std::size_t fold_in_sweeps) {
  const auto inf = mtm_fold_in(m, doc, combination, fold_in_sweeps);
  auto ranked = mtm_scores(m, inf.theta);
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

void mtm_update(MtmModel& m, std::span<const std::uint32_t> doc, std::string_view combination,
                std::string_view developer, std::size_t fold_in_sweeps) {
  const auto inf = mtm_fold_in(m, doc, combination, fold_in_sweeps);
  const std::size_t K = m.lda.num_topics;

  auto c = m.combination_index(combination);
  if (!c) {
    m.combinations.emplace_back(combination);
    append_zero_row(m.n_ck, K);
    c = m.combinations.size() - 1;
  }
  auto dev = m.developer_index(developer);
  if (!dev) {
    m.developers.emplace_back(developer);
    m.dev_topic_counts.conservativeResize(m.dev_topic_counts.rows() + 1, static_cast<Eigen::Index>(K));
    m.dev_topic_counts.row(m.dev_topic_counts.rows() - 1).setZero();
    dev = m.developers.size() - 1;
  }

  // The report joins the corpus with its fold-in assignments so every count
  // stays derivable from z.
  TokenSeq words;
  for (auto w : doc) {
    if (w < m.lda.vocab_size) words.push_back(w);
  }
  auto& lda = m.lda;
  lda.docs.push_back(std::move(words));
  lda.z.push_back(inf.z);
  m.doc_combination.push_back(*c);
  m.doc_developer.push_back(*dev);
  lda.n_dk.conservativeResize(lda.n_dk.rows() + 1, static_cast<Eigen::Index>(K));
  lda.n_dk.row(lda.n_dk.rows() - 1) = inf.topic_counts.transpose();
  for (std::size_t i = 0; i < inf.z.size(); ++i) {
    ++lda.n_kw(inf.z[i], lda.docs.back()[i]);
    ++lda.n_k(inf.z[i]);
  }
  m.n_ck.row(static_cast<Eigen::Index>(*c)) += inf.topic_counts.transpose();

  // Full re-estimation keeps an updated model bit-identical to its reload.
  mtm_estimate(m);
}

nlohmann::json to_json(const MtmModel& m) {
  nlohmann::json j;
  j["lda"] = to_json(m.lda);
  j["combinations"] = m.combinations;
  j["doc_combination"] = m.doc_combination;
  j["developers"] = m.developers;
  j["doc_developer"] = m.doc_developer;
  return j;
}

MtmModel mtm_from_json(const nlohmann::json& j) {
  MtmModel m;
  m.lda = lda_from_json(j.at("lda"));
  m.combinations = j.at("combinations").get<std::vector<std::string>>();
  m.doc_combination = j.at("doc_combination").get<std::vector<std::size_t>>();
  m.developers = j.at("developers").get<std::vector<std::string>>();
  m.doc_developer = j.at("doc_developer").get<std::vector<std::size_t>>();
  if (m.doc_combination.size() != m.lda.docs.size() || m.doc_developer.size() != m.lda.docs.size()) {
    throw DataError("mtm model: per-document label count mismatch");
  }
  for (auto c : m.doc_combination) {
    if (c >= m.combinations.size()) throw DataError("mtm model: combination index out of range");
  }
  for (auto d : m.doc_developer) {
    if (d >= m.developers.size()) throw DataError("mtm model: developer index out of range");
  }
  rebuild_counts(m);
  mtm_estimate(m);
  return m;
}

}  // namespace bugtriage::topics
