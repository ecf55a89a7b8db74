#include <benchmark/benchmark.h>

#include <map>

#include "bugtriage/clustering.hpp"
#include "bugtriage/corpus.hpp"
#include "bugtriage/developer_model.hpp"
#include "bugtriage/eval.hpp"
#include "bugtriage/lda.hpp"
#include "bugtriage/synthetic.hpp"

using namespace bugtriage;

static void BM_GibbsSweep(benchmark::State& state) {
  const auto planted = synthetic::planted_lda_corpus(static_cast<std::size_t>(state.range(0)), 2, 10, 50, 42);
  auto m = topics::lda_init(planted.docs, 2, planted.vocab_size, topics::LdaPriors::defaults(2), 42);
  for (auto _ : state) {
    topics::gibbs_sweep(m);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 50);
}
BENCHMARK(BM_GibbsSweep)->Arg(100)->Arg(1000);

static void BM_DensityCluster(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(7);
  Eigen::MatrixXd x(n, 5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double offset = i % 2 == 0 ? 0.0 : 50.0;
    for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = offset + rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(devtopics::density_cluster(x));
}
BENCHMARK(BM_DensityCluster)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_FitDeveloperModel(benchmark::State& state) {
  synthetic::PlantedProjectConfig cfg;
  cfg.reports_per_developer = static_cast<std::size_t>(state.range(0));
  cfg.noise_reports = 0;
  const auto reports = synthetic::planted_project(cfg);
  std::vector<corpus::BugReport> crash;
  for (const auto& r : reports) {
    if (r.assignee == synthetic::planted_developers().front().id) crash.push_back(r);
  }
  const devtopics::DeveloperModelConfig model_cfg;
  for (auto _ : state) benchmark::DoNotOptimize(devtopics::fit_developer_model("crash", crash, model_cfg));
}
BENCHMARK(BM_FitDeveloperModel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_EvaluatePlanted(benchmark::State& state) {
  const auto corpus = corpus::filter_corpus(synthetic::planted_project(), corpus::FilterConfig{});
  const eval::EvalConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(eval::evaluate(corpus.kept, cfg));
}
BENCHMARK(BM_EvaluatePlanted)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
