#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "bugtriage/clustering.hpp"
#include "bugtriage/ctfidf.hpp"
#include "bugtriage/developer_model.hpp"
#include "bugtriage/embedding.hpp"
#include "bugtriage/pca.hpp"
#include "bugtriage/synthetic.hpp"
#include "support/oracles.hpp"

namespace bugtriage::devtopics {
namespace {

// ---------------------------------------------------------------- PCA

TEST(Pca, LineFixture) {
  Eigen::MatrixXd x(5, 2);
  for (int i = 0; i < 5; ++i) x.row(i) << i - 2.0, 2.0 * (i - 2.0);
  const auto m = pca_fit(x, 2);
  EXPECT_NEAR(m.components(0, 0), 1.0 / std::sqrt(5.0), 1e-8);
  EXPECT_NEAR(m.components(0, 1), 2.0 / std::sqrt(5.0), 1e-8);
  EXPECT_NEAR(m.explained_variance(1), 0.0, 1e-9);
}

TEST(Pca, FullRankRoundTrip) {
  Rng rng(1);
  const auto x = oracle::random_matrix(rng, 10, 4);
  const auto m = pca_fit(x, 4);
  EXPECT_LT((pca_inverse_transform(m, pca_transform(m, x)) - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, OrthonormalAndOrderedOnRandomMatrices) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.below(20));
    const auto d = static_cast<Eigen::Index>(2 + rng.below(20));
    const auto x = oracle::random_matrix(rng, n, d);
    const auto r = 1 + rng.below(static_cast<std::size_t>(std::min(n - 1, d)));
    const auto m = pca_fit(x, r);
    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index i = 1; i < m.explained_variance.size(); ++i) {
      EXPECT_LE(m.explained_variance(i), m.explained_variance(i - 1) + 1e-12);
    }
  }
}

TEST(Pca, RejectsBadRank) {
  Rng rng(3);
  const auto x = oracle::random_matrix(rng, 4, 3);
  EXPECT_THROW(pca_fit(x, 0), ArgumentError);
  EXPECT_THROW(pca_fit(x, 4), ArgumentError);
}

// ---------------------------------------------------------------- k-means

TEST(KMeans, FourPointFixture) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto a = kmeans(x, 2, 42);
  EXPECT_EQ(a.labels[0], a.labels[1]);
  EXPECT_EQ(a.labels[2], a.labels[3]);
  EXPECT_NE(a.labels[0], a.labels[2]);
  const auto left = a.labels[0], right = a.labels[2];
  EXPECT_EQ(a.centroids(left, 0), 0.0);
  EXPECT_EQ(a.centroids(left, 1), 0.5);
  EXPECT_EQ(a.centroids(right, 0), 10.0);
  EXPECT_EQ(a.centroids(right, 1), 0.5);
  EXPECT_DOUBLE_EQ(a.inertia, 1.0);
}

TEST(KMeans, KEqualsNGivesZeroInertia) {
  Rng rng(4);
  const auto x = oracle::random_matrix(rng, 7, 3);
  const auto a = kmeans(x, 7, 1);
  EXPECT_EQ(std::set<int>(a.labels.begin(), a.labels.end()).size(), 7u);
  EXPECT_EQ(a.inertia, 0.0);
}

TEST(KMeans, InertiaNeverIncreasesAndIsDeterministic) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(5 + rng.below(60));
    const auto x = oracle::random_matrix(rng, n, 2 + static_cast<Eigen::Index>(rng.below(4)));
    const auto k = 1 + rng.below(std::min<std::size_t>(8, static_cast<std::size_t>(n)));
    const auto seed = rng.next();
    const auto a = kmeans(x, k, seed);
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i) {
      EXPECT_LE(a.inertia_history[i], a.inertia_history[i - 1] + 1e-9);
    }
    EXPECT_EQ(kmeans(x, k, seed).labels, a.labels);
  }
}

// ---------------------------------------------------------------- density

TEST(Density, TwoBlobs) {
  const auto x = oracle::two_blobs(50, 100.0, 0.5, 7);
  const auto a = density_cluster(x, 5, 5);
  EXPECT_EQ(a.num_clusters, 2u);
  EXPECT_LE(a.outlier_count(), 5u);
  for (int l : a.labels) EXPECT_TRUE(l == kOutlier || (l >= 0 && l < 2));
}

TEST(Density, PermutationGivesSamePartition) {
  const auto x = oracle::two_blobs(50, 100.0, 0.5, 7);
  std::vector<Eigen::Index> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(9);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  Eigen::MatrixXd y(100, 2);
  for (Eigen::Index i = 0; i < 100; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  const auto a = density_cluster(x);
  const auto b = density_cluster(y);
  std::vector<int> b_in_x_order(100);
  for (std::size_t i = 0; i < 100; ++i) b_in_x_order[static_cast<std::size_t>(perm[i])] = b.labels[i];
  EXPECT_TRUE(oracle::same_partition(a.labels, b_in_x_order));
}

TEST(Density, IdenticalPointsFormOneCluster) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(12, 3, 1.5);
  const auto a = density_cluster(x);
  EXPECT_EQ(a.num_clusters, 1u);
  EXPECT_EQ(a.outlier_count(), 0u);
}

TEST(Density, MinClusterSizeNLeavesOnlyOutliers) {
  Rng rng(12);
  Eigen::MatrixXd x(30, 2);
  for (Eigen::Index i = 0; i < 30; ++i) x.row(i) << rng.uniform(), rng.uniform();
  const auto a = density_cluster(x, 30, 5);
  EXPECT_EQ(a.num_clusters, 0u);
  EXPECT_EQ(a.outlier_count(), 30u);
}

// ---------------------------------------------------------------- c-TF-IDF

struct Classes {
  text::Vocabulary vocab;
  std::vector<text::BowVector> docs;
  std::vector<int> labels;
};

// Class 0: "t t t" + 7 x "u"; class 1: 10 x "v". Two classes of 10 tokens.
Classes hand_classes() {
  std::vector<text::TokenList> tokens = {{"t", "t", "t", "u", "u", "u"}, {"u", "u", "u", "u"}, {"v", "v", "v", "v", "v"},
                                         {"v", "v", "v", "v", "v"}};
  Classes c;
  c.vocab = text::build_vocabulary(tokens);
  for (const auto& t : tokens) c.docs.push_back(text::to_bow(t, c.vocab));
  c.labels = {0, 0, 1, 1};
  return c;
}

TEST(Ctfidf, HandValue) {
  const auto c = hand_classes();
  const auto rep = ctfidf(c.labels, c.docs, c.vocab);
  const auto t = static_cast<Eigen::Index>(*c.vocab.index_of("t"));
  EXPECT_DOUBLE_EQ(rep.mean_class_tokens, 10.0);
  EXPECT_NEAR(rep.weights(0, t), 3.0 * std::log(1.0 + 10.0 / 3.0), 1e-9);
  EXPECT_EQ(rep.weights(1, t), 0.0);
  EXPECT_GE(rep.weights.minCoeff(), 0.0);
}

TEST(Ctfidf, OutliersExcludedAndTopWords) {
  auto c = hand_classes();
  c.labels = {0, kOutlier, 1, 1};
  const auto rep = ctfidf(c.labels, c.docs, c.vocab);
  EXPECT_EQ(rep.sizes, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(rep.top_words[1], (std::vector<std::string>{"v"}));
  EXPECT_EQ(rep.top_words[0].front(), "t");
}

// ---------------------------------------------------------------- embeddings

TEST(Embedding, NearDuplicatesCloserThanDisjoint) {
  const std::vector<text::TokenList> tokens = {{"crash", "segfault", "abort", "core"},
                                               {"crash", "segfault", "abort", "dump"},
                                               {"button", "dialog", "toolbar", "menu"},
                                               {"proxy", "socket", "timeout", "dns"}};
  const auto vocab = text::build_vocabulary(tokens);
  std::vector<text::BowVector> bows;
  for (const auto& t : tokens) bows.push_back(text::to_bow(t, vocab));
  const auto e = embed_tfidf_lsa(bows, vocab, 3);
  auto cosine = [&](Eigen::Index a, Eigen::Index b) { return e.row(a).dot(e.row(b)) / (e.row(a).norm() * e.row(b).norm()); };
  EXPECT_GT(cosine(0, 1), cosine(0, 2));
  EXPECT_EQ(e.rows(), 4);
  EXPECT_EQ(e.cols(), 3);
}

TEST(Embedding, ExternalFilePassesThrough) {
  const auto path = std::filesystem::temp_directory_path() / "bugtriage_external_embeddings.csv";
  {
    std::ofstream out(path);
    for (const char* id : {"a", "b", "c"}) {
      out << id;
      for (int j = 0; j < 384; ++j) out << ',' << (j * 0.001);
      out << '\n';
    }
  }
  const auto table = ExternalEmbeddings::load(path);
  const std::vector<std::string> ids = {"c", "a"};
  const auto m = embed_external(ids, table);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 384);
  EXPECT_THROW(embed_external(std::vector<std::string>{"zzz"}, table), DataError);
  std::filesystem::remove(path);
}

// ---------------------------------------------------------------- developer models

corpus::BugReport report_in(const synthetic::PlantedDeveloper& vocab_of, const std::string& developer, int i) {
  auto r = synthetic::planted_report(vocab_of, std::to_string(i), make_timestamp(2012, 1, 1) + std::chrono::hours(i),
                                     static_cast<std::uint64_t>(1000 + i));
  r.assignee = developer;
  return r;
}

std::vector<corpus::BugReport> two_group_developer() {
  const auto& devs = synthetic::planted_developers();
  std::vector<corpus::BugReport> reports;
  for (int i = 0; i < 120; ++i) reports.push_back(report_in(devs[static_cast<std::size_t>(i % 2)], "dual", i));
  return reports;
}

bool only_from(const std::vector<std::string>& words, const std::vector<std::string>& own,
               const std::vector<std::string>& other) {
  bool any_own = false;
  for (const auto& w : words) {
    if (std::find(other.begin(), other.end(), w) != other.end()) return false;
    any_own = any_own || std::find(own.begin(), own.end(), w) != own.end();
  }
  return any_own;
}

TEST(DeveloperModel, SeparatesTwoVocabularies) {
  const auto& devs = synthetic::planted_developers();
  const auto model = fit_developer_model("dual", two_group_developer(), DeveloperModelConfig{});
  ASSERT_GE(model.num_topics(), 2u);
  bool crash_topic = false, ui_topic = false;
  for (const auto& words : model.topics.top_words) {
    crash_topic = crash_topic || only_from(words, devs[0].vocabulary, devs[1].vocabulary);
    ui_topic = ui_topic || only_from(words, devs[1].vocabulary, devs[0].vocabulary);
  }
  EXPECT_TRUE(crash_topic);
  EXPECT_TRUE(ui_topic);
}

TEST(DeveloperModel, DeterministicAndRoundTrips) {
  const auto reports = two_group_developer();
  const auto a = fit_developer_model("dual", reports, DeveloperModelConfig{});
  const auto b = fit_developer_model("dual", reports, DeveloperModelConfig{});
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());

  const auto path = std::filesystem::temp_directory_path() / "bugtriage_roundtrip.model";
  save_model(path, a);
  const auto loaded = load_model(path);
  std::filesystem::remove(path);
  const auto& devs = synthetic::planted_developers();
  for (int i = 0; i < 30; ++i) {
    const auto probe = report_in(devs[static_cast<std::size_t>(i % devs.size())], "x", 5000 + i);
    EXPECT_NEAR(score_document(loaded, probe), score_document(a, probe), 1e-12);
  }
}

TEST(DeveloperModel, IdenticalReportsGiveOneTopic) {
  const auto& crash = synthetic::planted_developers()[0];
  std::vector<corpus::BugReport> reports;
  for (int i = 0; i < 100; ++i) {
    auto r = synthetic::planted_report(crash, std::to_string(i), make_timestamp(2012, 1, 1), 5);
    r.assignee = "same";
    reports.push_back(std::move(r));
  }
  EXPECT_EQ(fit_developer_model("same", reports, DeveloperModelConfig{}).num_topics(), 1u);
}

DeveloperModelConfig kmeans_config(std::size_t k) {
  DeveloperModelConfig cfg;
  cfg.clusterer = ClustererKind::kmeans;
  cfg.kmeans_k = k;
  cfg.target_topics = 100;
  return cfg;
}

corpus::BugReport text_report(const std::string& id, const std::string& title) {
  corpus::BugReport r;
  r.id = id;
  r.title = title;
  r.product = "P";
  r.component = "C";
  r.assignee = "d";
  r.created_time = make_timestamp(2012, 1, 1);
  return r;
}

std::vector<corpus::BugReport> three_topics() {
  return {text_report("1", "crash segfault abort"), text_report("2", "button dialog toolbar"),
          text_report("3", "proxy socket timeout")};
}

TEST(Scoring, SoleMemberScoresOne) {
  const auto reports = three_topics();
  const auto model = fit_developer_model("d", reports, kmeans_config(3));
  ASSERT_EQ(model.num_topics(), 3u);
  for (const auto& r : reports) EXPECT_NEAR(score_document(model, r), 1.0, 1e-9);
  corpus::BugReport unrelated = text_report("9", "glossary chapter paragraph");
  unrelated.product = "Other";
  unrelated.component = "Else";
  unrelated.priority = 5;
  unrelated.severity = 7;
  EXPECT_EQ(score_document(model, unrelated), 0.0);
}

TEST(Scoring, CrashReportPrefersCrashDeveloper) {
  const auto& devs = synthetic::planted_developers();
  std::vector<corpus::BugReport> crash, ui;
  for (int i = 0; i < 40; ++i) {
    crash.push_back(report_in(devs[0], devs[0].id, i));
    ui.push_back(report_in(devs[1], devs[1].id, 100 + i));
  }
  const auto crash_model = fit_developer_model(devs[0].id, crash, DeveloperModelConfig{});
  const auto ui_model = fit_developer_model(devs[1].id, ui, DeveloperModelConfig{});
  for (int i = 0; i < 10; ++i) {
    const auto probe = report_in(devs[0], "?", 900 + i);
    EXPECT_GT(score_document(crash_model, probe), score_document(ui_model, probe));
  }
}

TEST(ReduceTopics, ReachesTargetWithValidLabels) {
  const auto& devs = synthetic::planted_developers();
  std::vector<corpus::BugReport> reports;
  for (int i = 0; i < 36; ++i) reports.push_back(report_in(devs[static_cast<std::size_t>(i % 6)], "d", i));
  const auto model = fit_developer_model("d", reports, kmeans_config(12));
  ASSERT_EQ(model.num_topics(), 12u);
  const auto reduced = reduce_topics(model, 10);
  EXPECT_EQ(reduced.num_topics(), 10u);
  for (int l : reduced.clusters.labels) EXPECT_TRUE(l == kOutlier || (l >= 0 && l < 10));
  EXPECT_EQ(reduce_topics(model, 20).num_topics(), 12u);
}

TEST(ReduceTopics, DuplicateTopicsMergeFirst) {
  auto model = fit_developer_model("d", three_topics(), kmeans_config(3));
  const int first = model.clusters.labels[0];
  const int third = model.clusters.labels[2];
  // Give the third topic the first one's term counts.
  Eigen::MatrixXd counts = model.topics.term_counts;
  counts.row(third) = counts.row(first);
  model.topics = ctfidf_from_counts(counts, model.topics.sizes, model.vocab, model.topics.top_n);
  const auto reduced = reduce_topics(model, 2);
  EXPECT_EQ(reduced.clusters.labels[0], reduced.clusters.labels[2]);
  EXPECT_NE(reduced.clusters.labels[0], reduced.clusters.labels[1]);
}

TEST(ReduceOutliers, IdenticalOutlierJoinsAndDisjointStays) {
  auto reports = three_topics();
  reports.push_back(text_report("4", "crash segfault abort"));
  reports.push_back(text_report("5", "glossary chapter paragraph"));
  reports.back().product = "Other";
  reports.back().component = "Else";
  reports.back().priority = 5;
  reports.back().severity = 7;
  auto model = fit_developer_model("d", reports, kmeans_config(3));
  model.clusters.labels[3] = kOutlier;
  model.clusters.labels[4] = kOutlier;
  model.topics = ctfidf(model.clusters.labels, model.training_terms, model.vocab, model.topics.top_n);
  const auto before = model.clusters.outlier_count();
  const auto reduced = reduce_outliers(model, 0.05);
  EXPECT_EQ(reduced.clusters.labels[3], reduced.clusters.labels[0]);
  EXPECT_EQ(reduced.clusters.labels[4], kOutlier);
  EXPECT_LE(reduced.clusters.outlier_count(), before);
}

TEST(ModelFiles, SanitizedNames) {
  EXPECT_EQ(model_file_name("crash.dev@example.org"), "crash.dev@example.org.model");
  const auto odd = model_file_name("a/b c");
  EXPECT_EQ(odd.find('/'), std::string::npos);
  EXPECT_NE(odd, model_file_name("a_b_c"));
}

}  // namespace
}  // namespace bugtriage::devtopics
