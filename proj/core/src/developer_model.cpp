#include "bugtriage/developer_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bugtriage::devtopics {

namespace {

std::string pseudo_value(std::string_view raw) {
  std::string v = to_lower(trim(raw));
  for (auto& ch : v) {
    if (std::isspace(static_cast<unsigned char>(ch))) ch = '_';
  }
  return v;
}

Timestamp timestamp_from_json(const nlohmann::json& j) {
  auto t = parse_timestamp(j.get<std::string>());
  if (!t) throw DataError("model: bad timestamp '" + j.get<std::string>() + "'");
  return *t;
}

double cosine(const Eigen::VectorXd& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(b.dot(a) / (na * nb), 0.0, 1.0);
}

Eigen::VectorXd weighted_bow(const DeveloperTopicModel& m, const text::BowVector& bow) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.vocab.size()));
  for (const auto& [w, n] : bow.counts) {
    const auto i = static_cast<Eigen::Index>(w);
    v(i) = static_cast<double>(n) * m.topics.class_idf(i);
  }
  return v;
}

void recompute_topics(DeveloperTopicModel& m, std::size_t top_n) {
  m.clusters.num_clusters = static_cast<std::size_t>(
      std::max(0, *std::max_element(m.clusters.labels.begin(), m.clusters.labels.end()) + 1));
  m.topics = ctfidf(m.clusters.labels, m.training_terms, m.vocab, top_n);
  m.clusters.centroids = cluster_means(m.coordinates, m.clusters.labels, m.clusters.num_clusters);
}

nlohmann::json bow_json(const text::BowVector& b) {
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [w, n] : b.counts) counts.push_back({w, n});
  return counts;
}

}  // namespace

void DeveloperModelConfig::validate() const {
  tokens.validate();
  if (embedding.kind == EmbeddingKind::tfidf_lsa && embedding.dims == 0) throw ArgumentError("embedding dims must be positive");
  if (reduce_dimensions && reduced_dims == 0) throw ArgumentError("reduced_dims must be positive");
  if (min_cluster_size < 2) throw ArgumentError("min_cluster_size must be at least 2");
  if (min_samples < 1) throw ArgumentError("min_samples must be at least 1");
  if (kmeans_k < 1) throw ArgumentError("kmeans k must be positive");
  if (target_topics < 1) throw ArgumentError("target_topics must be positive");
  if (!(outlier_threshold >= 0.0 && outlier_threshold <= 1.0)) throw ArgumentError("outlier_threshold must be in [0, 1]");
  if (top_n < 1) throw ArgumentError("top_n must be positive");
}

nlohmann::json to_json(const DeveloperModelConfig& c) {
  return {{"tokens", text::to_json(c.tokens)},
          {"embedding", to_json(c.embedding)},
          {"reduce_dimensions", c.reduce_dimensions},
          {"reduced_dims", c.reduced_dims},
          {"clusterer", c.clusterer == ClustererKind::kmeans ? "kmeans" : "density"},
          {"min_cluster_size", c.min_cluster_size},
          {"min_samples", c.min_samples},
          {"kmeans_k", c.kmeans_k},
          {"min_reports", c.min_reports},
          {"target_topics", c.target_topics},
          {"small_model_threshold", c.small_model_threshold},
          {"outlier_threshold", c.outlier_threshold},
          {"top_n", c.top_n},
          {"seed", c.seed}};
}

DeveloperModelConfig developer_model_config_from_json(const nlohmann::json& j) {
  DeveloperModelConfig c;
  if (j.contains("tokens")) c.tokens = text::token_config_from_json(j.at("tokens"));
  if (j.contains("embedding")) c.embedding = embedding_provider_from_json(j.at("embedding"));
  c.reduce_dimensions = j.value("reduce_dimensions", c.reduce_dimensions);
  c.reduced_dims = j.value("reduced_dims", c.reduced_dims);
  const auto kind = j.value("clusterer", std::string("density"));
  if (kind == "density") {
    c.clusterer = ClustererKind::density;
  } else if (kind == "kmeans") {
    c.clusterer = ClustererKind::kmeans;
  } else {
    throw ArgumentError("unknown clusterer '" + kind + "'");
  }
  c.min_cluster_size = j.value("min_cluster_size", c.min_cluster_size);
  c.min_samples = j.value("min_samples", c.min_samples);
  c.kmeans_k = j.value("kmeans_k", c.kmeans_k);
  c.min_reports = j.value("min_reports", c.min_reports);
  c.target_topics = j.value("target_topics", c.target_topics);
  c.small_model_threshold = j.value("small_model_threshold", c.small_model_threshold);
  c.outlier_threshold = j.value("outlier_threshold", c.outlier_threshold);
  c.top_n = j.value("top_n", c.top_n);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

text::TokenList document_tokens(const corpus::BugReport& report, const text::TokenPipelineConfig& cfg) {
  auto tokens = text::tokenize(report.text(), cfg);
  if (auto v = pseudo_value(report.product); !v.empty()) tokens.push_back("prod=" + v);
  if (auto v = pseudo_value(report.component); !v.empty()) tokens.push_back("comp=" + v);
  tokens.push_back("prio=" + std::to_string(report.priority));
  tokens.push_back("sev=" + std::to_string(report.severity));
  return tokens;
}

DeveloperTopicModel fit_developer_model(const std::string& developer, std::span<const corpus::BugReport> reports,
                                        const DeveloperModelConfig& cfg, const ExternalEmbeddings* external) {
  cfg.validate();
  if (reports.empty() || reports.size() < cfg.min_reports) {
    throw InsufficientDataError("developer " + developer + " has " + std::to_string(reports.size()) +
                                " reports, need " + std::to_string(std::max<std::size_t>(cfg.min_reports, 1)));
  }
  const std::size_t n = reports.size();

  DeveloperTopicModel m;
  m.developer = developer;
  m.embedding = cfg.embedding;
  m.tokens = cfg.tokens;
  m.seed = cfg.seed;
  m.fitted_from = m.fitted_to = reports.front().created_time;
  std::vector<text::TokenList> docs;
  docs.reserve(n);
  for (const auto& r : reports) {
    m.training_ids.push_back(r.id);
    m.fitted_from = std::min(m.fitted_from, r.created_time);
    m.fitted_to = std::max(m.fitted_to, r.created_time);
    docs.push_back(document_tokens(r, cfg.tokens));
  }
  m.vocab = text::build_vocabulary(docs);
  for (std::size_t d = 0; d < n; ++d) m.training_terms.push_back(text::to_bow(docs[d], m.vocab, m.training_ids[d]));

  if (n == 1) {
    m.coordinates = Eigen::MatrixXd::Zero(1, 1);
    m.clusters.method = "single";
    m.clusters.labels = {0};
    m.clusters.num_clusters = 1;
    m.clusters.params = nlohmann::json::object();
    recompute_topics(m, cfg.top_n);
    return m;
  }

  const Eigen::MatrixXd x = embed(m.training_ids, m.training_terms, m.vocab, cfg.embedding, external);
  if (cfg.reduce_dimensions) {
    const std::size_t r = std::min({cfg.reduced_dims, n - 1, static_cast<std::size_t>(x.cols())});
    m.pca = pca_fit(x, r);
    m.coordinates = pca_transform(*m.pca, x);
  } else {
    m.coordinates = x;
  }

  if (cfg.clusterer == ClustererKind::kmeans) {
    m.clusters = kmeans(m.coordinates, std::min(cfg.kmeans_k, n), cfg.seed);
  } else {
    if (n >= cfg.min_cluster_size) m.clusters = density_cluster(m.coordinates, cfg.min_cluster_size, cfg.min_samples);
    if (m.clusters.num_clusters == 0) {
      const std::size_t k =
          std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))))));
      m.warnings.push_back("density clustering found no clusters; kmeans fallback with k=" + std::to_string(k));
      m.clusters = kmeans(m.coordinates, k, cfg.seed);
    }
  }
  m.topics = ctfidf(m.clusters.labels, m.training_terms, m.vocab, cfg.top_n);

  if (m.num_topics() > cfg.target_topics) m = reduce_topics(std::move(m), cfg.target_topics);
  if (n < cfg.small_model_threshold && m.clusters.outlier_count() > 0) {
    m = reduce_outliers(std::move(m), cfg.outlier_threshold);
  }
  return m;
}

DeveloperTopicModel reduce_topics(DeveloperTopicModel m, std::size_t target) {
  if (target < 1) throw ArgumentError("reduce_topics: target must be at least 1");
  const std::size_t top_n = m.topics.top_n;
  while (m.num_topics() > target) {
    const Eigen::MatrixXd& w = m.topics.weights;
    const Eigen::VectorXd norms = w.rowwise().norm();
    Eigen::Index bi = 0, bj = 1;
    double best = -1.0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < w.rows(); ++j) {
        const double denom = norms(i) * norms(j);
        const double c = denom > 0.0 ? w.row(i).dot(w.row(j)) / denom : 0.0;
        if (c > best) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    }
    Eigen::MatrixXd tf = m.topics.term_counts;
    auto sizes = m.topics.sizes;
    tf.row(bi) += tf.row(bj);
    sizes[static_cast<std::size_t>(bi)] += sizes[static_cast<std::size_t>(bj)];
    // Drop row bj and shift later topics down by one.
    const Eigen::Index rows = tf.rows();
    if (bj + 1 < rows) tf.middleRows(bj, rows - bj - 1) = tf.bottomRows(rows - bj - 1).eval();
    tf.conservativeResize(rows - 1, Eigen::NoChange);
    sizes.erase(sizes.begin() + bj);
    for (auto& l : m.clusters.labels) {
      if (l == bj) {
        l = static_cast<int>(bi);
      } else if (l > bj) {
        --l;
      }
    }
    m.topics = ctfidf_from_counts(std::move(tf), std::move(sizes), m.vocab, top_n);
  }
  m.clusters.num_clusters = m.num_topics();
  m.clusters.centroids = cluster_means(m.coordinates, m.clusters.labels, m.clusters.num_clusters);
  return m;
}

DeveloperTopicModel reduce_outliers(DeveloperTopicModel m, double threshold) {
  if (m.num_topics() == 0 || m.clusters.num_clusters == 0) {
    m.warnings.push_back("reduce_outliers: model has no clusters; nothing reassigned");
    return m;
  }
  bool changed = false;
  for (std::size_t d = 0; d < m.clusters.labels.size(); ++d) {
    if (m.clusters.labels[d] != kOutlier) continue;
    const Eigen::VectorXd v = weighted_bow(m, m.training_terms[d]);
    int best_topic = kOutlier;
    double best = -1.0;
    for (Eigen::Index c = 0; c < m.topics.weights.rows(); ++c) {
      const double s = cosine(v, m.topics.weights.row(c));
      if (s > best) {
        best = s;
        best_topic = static_cast<int>(c);
      }
    }
    if (best >= threshold && best > 0.0) {
      m.clusters.labels[d] = best_topic;
      changed = true;
    }
  }
  if (changed) recompute_topics(m, m.topics.top_n);
  return m;
}

Eigen::VectorXd weighted_terms(const DeveloperTopicModel& model, std::span<const std::string> tokens) {
  return weighted_bow(model, text::to_bow(tokens, model.vocab));
}

double score_tokens(const DeveloperTopicModel& model, std::span<const std::string> tokens) {
  const Eigen::VectorXd v = weighted_terms(model, tokens);
  double best = 0.0;
  for (Eigen::Index c = 0; c < model.topics.weights.rows(); ++c) best = std::max(best, cosine(v, model.topics.weights.row(c)));
  return best;
}

double score_document(const DeveloperTopicModel& model, const corpus::BugReport& report) {
  const auto tokens = document_tokens(report, model.tokens);
  return score_tokens(model, tokens);
}

nlohmann::json to_json(const DeveloperTopicModel& m) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& b : m.training_terms) terms.push_back(bow_json(b));
  nlohmann::json coords = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.coordinates.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.coordinates.cols()));
    for (Eigen::Index k = 0; k < m.coordinates.cols(); ++k) row[static_cast<std::size_t>(k)] = m.coordinates(i, k);
    coords.push_back(std::move(row));
  }
  return {{"format", "bugtriage-developer-model"},
          {"version", 1},
          {"developer", m.developer},
          {"embedding", to_json(m.embedding)},
          {"tokens", text::to_json(m.tokens)},
          {"vocabulary", m.vocab.to_json()},
          {"pca", m.pca ? to_json(*m.pca) : nlohmann::json(nullptr)},
          {"coordinates", coords},
          {"clusters", to_json(m.clusters)},
          {"topics", to_json(m.topics)},
          {"training_ids", m.training_ids},
          {"training_terms", terms},
          {"fitted_from", format_timestamp(m.fitted_from)},
          {"fitted_to", format_timestamp(m.fitted_to)},
          {"seed", m.seed},
          {"warnings", m.warnings}};
}

DeveloperTopicModel developer_model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "bugtriage-developer-model") throw DataError("not a developer model");
    DeveloperTopicModel m;
    m.developer = j.at("developer").get<std::string>();
    m.embedding = embedding_provider_from_json(j.at("embedding"));
    m.tokens = text::token_config_from_json(j.at("tokens"));
    m.vocab = text::Vocabulary::from_json(j.at("vocabulary"));
    if (!j.at("pca").is_null()) m.pca = pca_from_json(j.at("pca"));
    const auto coords = j.at("coordinates").get<std::vector<std::vector<double>>>();
    const std::size_t cols = coords.empty() ? 0 : coords.front().size();
    m.coordinates.resize(static_cast<Eigen::Index>(coords.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].size() != cols) throw DataError("ragged coordinates");
      for (std::size_t k = 0; k < cols; ++k) m.coordinates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = coords[i][k];
    }
    m.clusters = cluster_assignment_from_json(j.at("clusters"));
    m.topics = topic_representation_from_json(j.at("topics"), m.vocab);
    m.training_ids = j.at("training_ids").get<std::vector<std::string>>();
    const auto& terms = j.at("training_terms");
    if (terms.size() != m.training_ids.size() || m.clusters.labels.size() != m.training_ids.size()) {
      throw DataError("training document count mismatch");
    }
    for (std::size_t d = 0; d < terms.size(); ++d) {
      text::BowVector b;
      b.doc_id = m.training_ids[d];
      for (const auto& e : terms[d]) {
        const auto w = e.at(0).get<std::size_t>();
        if (w >= m.vocab.size()) throw DataError("term index out of range");
        b.counts.emplace_back(w, e.at(1).get<std::size_t>());
      }
      m.training_terms.push_back(std::move(b));
    }
    if (m.topics.num_topics() != m.clusters.num_clusters) throw DataError("topic count differs from cluster count");
    m.fitted_from = timestamp_from_json(j.at("fitted_from"));
    m.fitted_to = timestamp_from_json(j.at("fitted_to"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("developer model: ") + e.what());
  }
}

const ModelIndexEntry* ModelIndex::find(std::string_view developer) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), developer,
                             [](const ModelIndexEntry& e, std::string_view d) { return e.developer < d; });
  return it != entries.end() && it->developer == developer ? &*it : nullptr;
}

std::string model_file_name(std::string_view developer) {
  std::string safe;
  bool changed = developer.empty() || developer.front() == '.';
  for (char ch : developer) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) || ch == '.' || ch == '_' || ch == '@' || ch == '+' || ch == '-') {
      safe.push_back(ch);
    } else {
      safe.push_back('_');
      changed = true;
    }
  }
  if (changed) safe += "-" + hex64(fnv1a64(developer)).substr(0, 8);
  return safe + ".model";
}

void save_model(const std::filesystem::path& path, const DeveloperTopicModel& model) {
  write_file_atomic(path, to_json(model).dump());
}

DeveloperTopicModel load_model(const std::filesystem::path& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt model file " + path.string() + ": " + e.what());
  }
  return developer_model_from_json(j);
}

ModelIndexEntry index_entry(const DeveloperTopicModel& m) {
  return {m.developer,         model_file_name(m.developer),       m.training_ids.size(), m.num_topics(),
          m.clusters.outlier_count(), m.fitted_from, m.fitted_to};
}

nlohmann::json to_json(const ModelIndex& index) {
  nlohmann::json devs = nlohmann::json::array();
  for (const auto& e : index.entries) {
    devs.push_back({{"developer", e.developer},
                    {"file", e.file},
                    {"report_count", e.report_count},
                    {"topic_count", e.topic_count},
                    {"outlier_count", e.outlier_count},
                    {"date_range", {format_timestamp(e.fitted_from), format_timestamp(e.fitted_to)}}});
  }
  return {{"developers", devs}, {"metadata", index.metadata.is_null() ? nlohmann::json::object() : index.metadata}};
}

ModelIndex model_index_from_json(const nlohmann::json& j) {
  try {
    ModelIndex index;
    index.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& d : j.at("developers")) {
      ModelIndexEntry e;
      e.developer = d.at("developer").get<std::string>();
      e.file = d.at("file").get<std::string>();
      e.report_count = d.at("report_count").get<std::size_t>();
      e.topic_count = d.at("topic_count").get<std::size_t>();
      e.outlier_count = d.value("outlier_count", std::size_t{0});
      e.fitted_from = timestamp_from_json(d.at("date_range").at(0));
      e.fitted_to = timestamp_from_json(d.at("date_range").at(1));
      index.entries.push_back(std::move(e));
    }
    std::sort(index.entries.begin(), index.entries.end(),
              [](const ModelIndexEntry& a, const ModelIndexEntry& b) { return a.developer < b.developer; });
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model index: ") + e.what());
  }
}

void save_model_index(const std::filesystem::path& models_dir, const ModelIndex& index) {
  auto sorted = index;
  std::sort(sorted.entries.begin(), sorted.entries.end(),
            [](const ModelIndexEntry& a, const ModelIndexEntry& b) { return a.developer < b.developer; });
  write_file_atomic(models_dir / kModelIndexFile, to_json(sorted).dump(2) + "\n");
}

ModelIndex load_model_index(const std::filesystem::path& models_dir) {
  const auto text = read_file(models_dir / kModelIndexFile);
  try {
    return model_index_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("corrupt model index: " + std::string(e.what()));
  }
}

}  // namespace bugtriage::devtopics
