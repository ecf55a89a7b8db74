// Acceptance suite: one PASS/FAIL line per criterion. Criterion 14 needs the
// public Eclipse Platform snapshot; pass its CSV path as the first argument or
// in BUGTRIAGE_ECLIPSE_CSV, otherwise it is reported as SKIP.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bugtriage/clustering.hpp"
#include "bugtriage/ctfidf.hpp"
#include "bugtriage/eval.hpp"
#include "bugtriage/lda.hpp"
#include "bugtriage/mtm.hpp"
#include "bugtriage/naive_bayes.hpp"
#include "bugtriage/pca.hpp"
#include "bugtriage/synthetic.hpp"
#include "bugtriage/triage.hpp"
#include "bugtriage_cli/cli.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace bugtriage;

namespace {

enum class Status { pass, fail, skip, info };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Status::fail, std::move(detail)}; }

std::string sci(double v, int digits = 3) {
  std::ostringstream s;
  s << std::setprecision(digits) << std::scientific << v;
  return s.str();
}

std::string two(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

// ------------------------------------------------------------------ 1

Outcome gibbs_oracle() {
  const std::vector<topics::TokenSeq> docs = {{0, 0, 1}, {1, 1, 2}};
  double worst = 0.0;
  std::size_t sites = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    auto m = topics::lda_init(docs, 2, 3, {0.5, 0.1}, seed);
    for (int sweep = 0; sweep <= 10; ++sweep) {
      for (std::size_t d = 0; d < docs.size(); ++d) {
        for (std::size_t i = 0; i < docs[d].size(); ++i) {
          const auto got = topics::site_conditional(m, d, i);
          const auto want = oracle::lda_conditional(m.docs, m.z, 2, 3, 0.5, 0.1, d, i);
          for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
          ++sites;
        }
      }
      topics::gibbs_sweep(m);
    }
  }
  const std::string detail = std::to_string(sites) + " sites, max |delta| " + sci(worst);
  return worst <= 1e-9 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 2

Outcome planted_topics() {
  const auto planted = synthetic::planted_lda_corpus(100, 2, 10, 50, 42);
  auto m = topics::lda_init(planted.docs, 2, planted.vocab_size, topics::LdaPriors::defaults(2), 42);
  topics::lda_train(m, 500);
  const double tv = oracle::matched_topic_tv(m.phi, planted.phi);
  const std::string detail = "matched topic TV " + sci(tv);
  return tv <= 0.15 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 3

double worst_row_error(const Eigen::MatrixXd& m) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) worst = std::max(worst, std::abs(m.row(r).sum() - 1.0));
  return worst;
}

Outcome normalization() {
  Rng rng(77);
  double worst = 0.0;
  const int corpora = 25;
  for (int trial = 0; trial < corpora; ++trial) {
    const auto K = 1 + rng.below(5);
    const auto V = 5 + rng.below(20);
    const auto docs = oracle::random_corpus(rng, 5 + rng.below(20), V, 15);
    auto lda = topics::lda_init(docs, K, V, topics::LdaPriors::defaults(K), rng.next());
    topics::lda_train(lda, 10, 5);
    worst = std::max({worst, worst_row_error(lda.theta), worst_row_error(lda.phi)});

    std::vector<topics::MtmDocument> mdocs;
    for (const auto& d : docs) mdocs.push_back({d, "c" + std::to_string(rng.below(3)), "dev" + std::to_string(rng.below(4))});
    auto mtm = topics::mtm_train(mdocs, K, V, topics::LdaPriors::defaults(K), rng.next(), 10, 5);
    worst = std::max({worst, worst_row_error(mtm.theta_c), worst_row_error(mtm.lda.theta), worst_row_error(mtm.lda.phi)});
    topics::mtm_update(mtm, docs.front(), "c9", "dev9", 10);
    worst = std::max({worst, worst_row_error(mtm.theta_c), worst_row_error(mtm.lda.theta), worst_row_error(mtm.lda.phi)});

    std::vector<text::TokenList> words;
    for (const auto& d : docs) {
      text::TokenList t;
      for (auto w : d) t.push_back("w" + std::to_string(w));
      words.push_back(std::move(t));
    }
    const auto nb = topics::train_topic_classifier(lda, words);
    worst = std::max(worst, std::abs(nb.log_priors().array().exp().sum() - 1.0));
    worst = std::max(worst, worst_row_error(nb.log_likelihoods().array().exp().matrix()));
  }
  const std::string detail = std::to_string(corpora) + " corpora, max |row sum - 1| " + sci(worst);
  return worst <= 1e-9 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 4

Outcome count_consistency() {
  Rng rng(8);
  std::size_t checks = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto K = 1 + rng.below(5);
    const auto V = 5 + rng.below(25);
    const auto docs = oracle::random_corpus(rng, 5 + rng.below(30), V, 20);
    auto lda = topics::lda_init(docs, K, V, topics::LdaPriors::defaults(K), rng.next());
    if (!oracle::counts_consistent(lda)) return fail("LDA counts differ after init");
    for (int s = 0; s < 5; ++s) {
      topics::gibbs_sweep(lda);
      if (!oracle::counts_consistent(lda)) return fail("LDA counts differ after a sweep");
      ++checks;
    }

    std::vector<topics::MtmDocument> mdocs;
    for (const auto& d : docs) mdocs.push_back({d, "c" + std::to_string(rng.below(3)), "dev" + std::to_string(rng.below(4))});
    auto mtm = topics::mtm_train(mdocs, K, V, topics::LdaPriors::defaults(K), rng.next(), 0, 5);
    if (!oracle::counts_consistent(mtm)) return fail("MTM counts differ after init");
    for (int s = 0; s < 5; ++s) {
      topics::mtm_sweep(mtm);
      if (!oracle::counts_consistent(mtm)) return fail("MTM counts differ after a sweep");
      ++checks;
    }
    for (int u = 0; u < 3; ++u) {
      topics::mtm_update(mtm, docs[rng.below(docs.size())], "c" + std::to_string(rng.below(5)),
                         "dev" + std::to_string(rng.below(6)), 5);
      if (!oracle::counts_consistent(mtm)) return fail("MTM counts differ after an update");
      ++checks;
    }
  }
  return pass(std::to_string(checks) + " recounts matched");
}

// ------------------------------------------------------------------ 5

Outcome pca() {
  Eigen::MatrixXd line(5, 2);
  for (int i = 0; i < 5; ++i) line.row(i) << i - 2.0, 2.0 * (i - 2.0);
  const auto m = devtopics::pca_fit(line, 2);
  Eigen::RowVector2d want(1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0));
  Eigen::RowVector2d got = m.components.row(0);
  if (got.dot(want) < 0) got = -got;
  const double line_err = (got - want).cwiseAbs().maxCoeff();
  if (line_err > 1e-8) return fail("line component error " + sci(line_err));

  Rng rng(2);
  double ortho = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.below(20));
    const auto d = static_cast<Eigen::Index>(2 + rng.below(20));
    const auto x = oracle::random_matrix(rng, n, d);
    const auto r = 1 + rng.below(static_cast<std::size_t>(std::min(n - 1, d)));
    const auto p = devtopics::pca_fit(x, r);
    const Eigen::MatrixXd gram = p.components * p.components.transpose();
    ortho = std::max(ortho, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
    for (Eigen::Index i = 1; i < p.explained_variance.size(); ++i) {
      if (p.explained_variance(i) > p.explained_variance(i - 1) + 1e-12) return fail("explained variance increases");
    }
  }
  const std::string detail = "line error " + sci(line_err) + ", orthonormality error " + sci(ortho);
  return ortho <= 1e-8 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 6

Outcome kmeans() {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 10, 0, 10, 1;
  const auto a = devtopics::kmeans(x, 2, 42);
  if (a.labels[0] != a.labels[1] || a.labels[2] != a.labels[3] || a.labels[0] == a.labels[2]) {
    return fail("four-point partition wrong");
  }
  const auto l = a.labels[0], r = a.labels[2];
  if (a.centroids(l, 0) != 0.0 || a.centroids(l, 1) != 0.5 || a.centroids(r, 0) != 10.0 || a.centroids(r, 1) != 0.5) {
    return fail("four-point centroids not exact");
  }
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(5 + rng.below(60));
    const auto pts = oracle::random_matrix(rng, n, 2 + static_cast<Eigen::Index>(rng.below(4)));
    const auto k = 1 + rng.below(std::min<std::size_t>(8, static_cast<std::size_t>(n)));
    const auto c = devtopics::kmeans(pts, k, rng.next());
    for (std::size_t i = 1; i < c.inertia_history.size(); ++i) {
      if (c.inertia_history[i] > c.inertia_history[i - 1] + 1e-9) return fail("inertia increased");
    }
  }
  return pass("fixture exact, inertia monotone on 50 datasets");
}

// ------------------------------------------------------------------ 7

Outcome density() {
  const auto blobs = oracle::two_blobs(50, 100.0, 0.5, 7);
  const auto a = devtopics::density_cluster(blobs, 5, 5);
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(12, 3, 1.5);
  const auto b = devtopics::density_cluster(same);
  const std::string detail = "blobs: " + std::to_string(a.num_clusters) + " clusters, " +
                             std::to_string(a.outlier_count()) + " outliers; identical points: " +
                             std::to_string(b.num_clusters) + " cluster(s)";
  return a.num_clusters == 2 && a.outlier_count() <= 5 && b.num_clusters == 1 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 8

Outcome ctfidf() {
  const std::vector<text::TokenList> tokens = {
      {"t", "t", "t", "u", "u", "u"}, {"u", "u", "u", "u"}, {"v", "v", "v", "v", "v"}, {"v", "v", "v", "v", "v"}};
  const auto vocab = text::build_vocabulary(tokens);
  std::vector<text::BowVector> docs;
  for (const auto& t : tokens) docs.push_back(text::to_bow(t, vocab));
  const std::vector<int> labels = {0, 0, 1, 1};
  const auto rep = devtopics::ctfidf(labels, docs, vocab);
  const auto t = static_cast<Eigen::Index>(*vocab.index_of("t"));
  const double want = 3.0 * std::log(1.0 + 10.0 / 3.0);
  const double err = std::abs(rep.weights(0, t) - want);
  std::ostringstream detail;
  detail << std::setprecision(10) << "W = " << rep.weights(0, t) << ", absent " << rep.weights(1, t);
  return err <= 1e-9 && rep.weights(1, t) == 0.0 ? pass(detail.str()) : fail(detail.str());
}

// ------------------------------------------------------------------ 9

Outcome metric_oracle() {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const auto recs = oracle::random_records(rng, 1 + rng.below(60), 2 + rng.below(12), 1 + rng.below(8));
    double previous = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) {
      const double hits = oracle::hit_fraction(recs, k);
      if (std::abs(eval::topk_accuracy(recs, k) - hits) > 1e-12 || std::abs(eval::recall(recs, k) - hits) > 1e-12 ||
          std::abs(eval::precision(recs, k) - hits / static_cast<double>(k)) > 1e-12) {
        return fail("metric differs from recount at k=" + std::to_string(k));
      }
      if (eval::topk_accuracy(recs, k) < previous) return fail("top-k accuracy decreases in k");
      previous = eval::topk_accuracy(recs, k);
    }
    if (eval::recall(recs, 1) != eval::precision(recs, 1) || eval::recall(recs, 1) != eval::topk_accuracy(recs, 1)) {
      return fail("recall(1), precision(1) and top-1 differ");
    }
  }
  return pass("100 record sets");
}

// ------------------------------------------------------------------ CLI runs

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bugtriage");
  args.push_back("-q");
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kFixture = fs::path(BUGTRIAGE_SOURCE_DIR) / "data/fixtures/planted.csv";

struct Pipeline {
  fs::path out;
  std::map<std::string, std::string> stdout_by_command;
  std::string failure;
};

Pipeline run_pipeline(const fs::path& out) {
  Pipeline p;
  p.out = out;
  fs::remove_all(out);
  const std::vector<std::string> common = {"--dataset", kFixture.string(), "--out", out.string(), "--seed", "42"};
  const std::vector<std::vector<std::string>> steps = {
      {"ingest"},
      {"train"},
      {"evaluate", "--project", "Planted"},
      {"recommend", "--title", "segfault crash", "--description", "coredump stacktrace abort", "--product",
       "Platform", "--component", "Core", "--created", "2012-12-20T00:00:00Z"},
  };
  for (auto step : steps) {
    const auto name = step.front();
    step.insert(step.end(), common.begin(), common.end());
    const auto r = cli(step);
    if (r.code != 0) {
      p.failure = name + " exited " + std::to_string(r.code) + ": " + r.err;
      return p;
    }
    p.stdout_by_command[name] = r.out;
  }
  return p;
}

fs::path scratch_root() {
  auto root = fs::temp_directory_path() / "bugtriage_acceptance";
  fs::create_directories(root);
  return root;
}

// ------------------------------------------------------------------ 10

Outcome end_to_end(const Pipeline& p) {
  if (!p.failure.empty()) return fail(p.failure);
  const auto run = nlohmann::json::parse(slurp(p.out / cli::kEvalRunFile));
  const double top1 = run["metrics"]["top_k"]["1"].get<double>();
  const double top5 = run["metrics"]["top_k"]["5"].get<double>();
  const std::string detail = "Top-1 " + two(top1) + ", Top-5 " + two(top5) + " over " +
                             std::to_string(run["test_size"].get<std::size_t>()) + " test reports";
  return top1 >= 0.90 && top5 == 1.0 ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 11

corpus::BugReport tie_report(std::string id, std::string dev, Timestamp created) {
  corpus::BugReport r;
  r.id = std::move(id);
  r.assignee = std::move(dev);
  r.product = "Platform";
  r.component = "Core";
  r.title = "crash segfault abort";
  r.created_time = created;
  r.resolution = "FIXED";
  return r;
}

Outcome tie_break() {
  const std::vector<corpus::BugReport> history = {tie_report("1", "older.dev", make_timestamp(2012, 11, 30)),
                                                  tie_report("2", "recent.dev", make_timestamp(2013, 1, 5))};
  devtopics::DeveloperModelConfig cfg;
  cfg.clusterer = devtopics::ClustererKind::kmeans;
  cfg.kmeans_k = 1;
  triage::ModelStore store;
  for (const auto& h : history) {
    store.put(std::make_shared<const devtopics::DeveloperTopicModel>(
        devtopics::fit_developer_model(h.assignee, std::vector{h}, cfg)));
  }
  triage::RecommendationRequest req;
  req.report = tie_report("q", "", make_timestamp(2013, 1, 10));
  const auto result = triage::recommend(req, profiles::build_profiles(history), store);
  if (result.results.size() != 2) return fail("expected two candidates");
  const auto& first = result.results[0];
  const std::string detail = "first " + first.developer + " (score " + two(first.score) + " vs " +
                             two(result.results[1].score) + "), tie_break_used=" + (first.tie_break_used ? "true" : "false");
  return first.developer == "recent.dev" && first.tie_break_used ? pass(detail) : fail(detail);
}

// ------------------------------------------------------------------ 12

Outcome leakage(const Pipeline& p) {
  std::size_t checked = 0;
  std::vector<std::string> problems;
  auto audit = [&](const eval::EvalRun& run, const std::string& label) {
    checked += run.audit.checked;
    if (!run.audit.ok()) problems.push_back(label + " audit flagged " + std::to_string(run.audit.violations.size()));
    if (!run.audit.max_train_time) return;
    for (const auto& r : run.records) {
      if (r.created_time < *run.audit.max_train_time) {
        problems.push_back(label + " evaluated " + r.report_id + " before training data ended");
        return;
      }
    }
  };
  if (!p.failure.empty()) return fail(p.failure);
  audit(eval::eval_run_from_json(nlohmann::json::parse(slurp(p.out / cli::kEvalRunFile))), "cli");

  const auto corpus = corpus::filter_corpus(synthetic::planted_project(), corpus::FilterConfig{});
  for (auto backend : {eval::Backend::per_developer, eval::Backend::mtm, eval::Backend::both}) {
    for (bool online : {false, true}) {
      eval::EvalConfig cfg;
      cfg.backend = backend;
      cfg.online_update = online;
      cfg.mtm.iterations = 50;
      audit(eval::evaluate(corpus.kept, cfg), eval::to_string(backend) + (online ? "+online" : ""));
    }
  }
  if (!problems.empty()) return fail(problems.front());
  return pass("7 evaluations, " + std::to_string(checked) + " evaluated reports checked");
}

// ------------------------------------------------------------------ 13

std::map<std::string, std::string> json_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".json") {
      out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    }
  }
  return out;
}

Outcome determinism(const Pipeline& a) {
  if (!a.failure.empty()) return fail(a.failure);
  const auto b = run_pipeline(scratch_root() / "repeat");
  if (!b.failure.empty()) return fail(b.failure);
  const auto fa = json_files(a.out);
  const auto fb = json_files(b.out);
  if (fa.size() != fb.size()) return fail("different JSON file sets");
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    if (it == fb.end() || it->second != bytes) return fail(name + " differs");
  }
  for (const auto& [cmd, out] : a.stdout_by_command) {
    if (b.stdout_by_command.at(cmd) != out) return fail(cmd + " output differs");
  }
  fs::remove_all(b.out);
  return pass(std::to_string(fa.size()) + " JSON files and " + std::to_string(a.stdout_by_command.size()) +
              " command outputs identical");
}

// ------------------------------------------------------------------ 14

Outcome eclipse_table(const std::string& path) {
  if (path.empty()) return {Status::skip, "no Eclipse Platform CSV given (argument or BUGTRIAGE_ECLIPSE_CSV)"};
  const auto out = scratch_root() / "eclipse";
  const auto r = cli({"ingest", "--dataset", path, "--out", out.string()});
  if (r.code != 0) return {Status::info, "ingest exited " + std::to_string(r.code)};
  const auto stats = nlohmann::json::parse(r.out);
  const std::vector<std::pair<std::string, long>> expected = {
      {"amount", 85156}, {"products", 4}, {"components", 21}, {"combinations", 25}};
  std::ostringstream detail;
  bool all = true;
  for (const auto& [key, want] : expected) {
    const long got = stats.value(key, -1L);
    all = all && got == want;
    detail << key << " " << got << " (published " << want << ") ";
  }
  detail << (all ? "exact match" : "snapshot differs");
  return {Status::info, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::string eclipse;
  if (argc > 1) {
    eclipse = argv[1];
  } else if (const char* env = std::getenv("BUGTRIAGE_ECLIPSE_CSV")) {
    eclipse = env;
  }

  Pipeline pipeline;
  bool pipeline_ready = false;
  auto planted_pipeline = [&]() -> const Pipeline& {
    if (!pipeline_ready) {
      pipeline = run_pipeline(scratch_root() / "planted");
      pipeline_ready = true;
    }
    return pipeline;
  };

  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;  // 0 = none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Gibbs conditional oracle", 1.0, gibbs_oracle},
      {2, "planted topic recovery", 30.0, planted_topics},
      {3, "normalization", 0.0, normalization},
      {4, "count consistency", 0.0, count_consistency},
      {5, "PCA", 0.0, pca},
      {6, "k-means", 0.0, kmeans},
      {7, "density clustering", 0.0, density},
      {8, "c-TF-IDF", 0.0, ctfidf},
      {9, "metric oracle", 0.0, metric_oracle},
      {10, "end-to-end planted triage", 120.0, [&] { return end_to_end(planted_pipeline()); }},
      {11, "tie-break by activity", 0.0, tie_break},
      {12, "no-leakage audit", 0.0, [&] { return leakage(planted_pipeline()); }},
      {13, "determinism", 0.0, [&] { return determinism(planted_pipeline()); }},
      {14, "Eclipse corpus statistics (informational)", 0.0, [&] { return eclipse_table(eclipse); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::pass && c.budget_seconds > 0 && seconds > c.budget_seconds) {
      o = fail(o.detail + "; exceeded " + two(c.budget_seconds) + " s budget");
    }
    const char* label = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : o.status == Status::skip ? "SKIP" : "INFO";
    if (o.status == Status::fail) ++failures;
    std::cout << label << " " << std::setw(2) << c.id << " " << c.name << ": " << o.detail << " [" << two(seconds)
              << " s]" << std::endl;
  }
  fs::remove_all(scratch_root());
  std::cout << (failures == 0 ? "all criteria met" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
