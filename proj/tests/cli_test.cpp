#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bugtriage/synthetic.hpp"
#include "bugtriage_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("bugtriage_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    dataset_ = dir_ / "planted.csv";
    ASSERT_EQ(run({"synth", "-o", dataset_.string()}).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "bugtriage");
    args.push_back("-q");
    std::ostringstream out, err;
    Result r;
    r.code = bugtriage::cli::run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  // Common flags for a run rooted in the test directory.
  std::vector<std::string> with(std::vector<std::string> args, const fs::path& out_dir) {
    for (const auto& a : {std::string("--dataset"), dataset_.string(), std::string("--out"), out_dir.string()})
      args.push_back(a);
    return args;
  }

  fs::path dir_;
  fs::path dataset_;
};

TEST_F(CliTest, IngestWritesStatsAndIsDeterministic) {
  const auto out = dir_ / "out";
  const auto r = run(with({"ingest"}, out));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stats = json::parse(r.out);
  for (const char* key :
       {"period", "amount", "products", "components", "combinations", "developers", "final_amount", "final_developers"})
    EXPECT_TRUE(stats.contains(key)) << key;
  EXPECT_EQ(stats["final_developers"], 6);
  EXPECT_TRUE(fs::exists(out / bugtriage::cli::kCorpusFile));
  EXPECT_TRUE(fs::exists(out / bugtriage::cli::kRejectsFile));

  const auto first = slurp(out / bugtriage::cli::kCorpusFile);
  const auto first_stats = slurp(out / bugtriage::cli::kStatsFile);
  ASSERT_EQ(run(with({"ingest"}, out)).code, 0);
  EXPECT_EQ(slurp(out / bugtriage::cli::kCorpusFile), first);
  EXPECT_EQ(slurp(out / bugtriage::cli::kStatsFile), first_stats);
}

TEST_F(CliTest, TrainPerDeveloperWritesOneModelEach) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run(with({"ingest"}, out)).code, 0);
  const auto r = run(with({"train"}, out));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto index = json::parse(r.out);
  ASSERT_EQ(index["developers"].size(), 6u);
  for (const auto& e : index["developers"]) EXPECT_TRUE(fs::exists(out / "models" / e["file"].get<std::string>()));
  EXPECT_TRUE(fs::exists(out / "models" / "index.json"));
  EXPECT_FALSE(fs::exists(out / "models" / "mtm.json"));

  const auto again = run(with({"train"}, out));
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, TrainMtmWithOneTopic) {
  const auto out = dir_ / "out";
  const auto r = run(with({"train", "--backend", "mtm", "--topics", "1", "--iterations", "20"}, out));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "models" / "mtm.json"));
}

TEST_F(CliTest, RecommendRanksCrashOwnerFirst) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run(with({"train"}, out)).code, 0);
  const std::vector<std::string> report = {"recommend",   "--title",     "segfault crash with stacktrace",
                                           "--description", "coredump after abort and nullpointer exception",
                                           "--product",   "Platform",    "--component", "Core",
                                           "--priority",  "P1",          "--severity",  "blocker"};
  auto top1 = report;
  top1.insert(top1.end(), {"--k", "1"});
  auto top5 = report;
  top5.insert(top5.end(), {"--k", "5"});
  const auto a = run(with(top1, out));
  const auto b = run(with(top5, out));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto ja = json::parse(a.out);
  const auto jb = json::parse(b.out);
  ASSERT_EQ(ja["results"].size(), 1u);
  EXPECT_EQ(ja["results"][0]["developer"], "crash.dev@example.org");
  EXPECT_EQ(jb["results"][0]["developer"], ja["results"][0]["developer"]);
}

TEST_F(CliTest, MissingArtifactsExitFour) {
  const auto r = run({"recommend", "--title", "crash", "--out", (dir_ / "nothing").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(run({"evaluate", "--out", (dir_ / "nothing").string()}).code, 4);
}

TEST_F(CliTest, EvaluateWritesTablesDeterministically) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run(with({"train"}, out)).code, 0);
  const auto baselines = fs::path(BUGTRIAGE_SOURCE_DIR) / "data/baselines_published.csv";
  const auto r = run(with({"evaluate", "--project", "Planted", "--baselines", baselines.string()}, out));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* col : {"Top-1", "Top-2", "Top-3", "Top-4", "Top-5"}) EXPECT_NE(r.out.find(col), std::string::npos);
  EXPECT_NE(r.out.find("| Planted |"), std::string::npos);
  EXPECT_NE(slurp(out / bugtriage::cli::kTablesCsvFile).find("top1,Average,MTM (published),top_k,1,0.56"),
            std::string::npos);

  const auto first = slurp(out / bugtriage::cli::kEvalRunFile);
  ASSERT_EQ(run(with({"evaluate", "--project", "Planted", "--baselines", baselines.string()}, out)).code, 0);
  EXPECT_EQ(slurp(out / bugtriage::cli::kEvalRunFile), first);
  EXPECT_GE(json::parse(first)["metrics"]["top_k"]["1"].get<double>(), 0.9);
}

TEST_F(CliTest, AssignIncrementsProfile) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run(with({"train"}, out)).code, 0);
  const std::vector<std::string> cmd = {"assign", "--developer", "ui.dev@example.org", "--title", "toolbar icon",
                                        "--component", "UI", "--product", "Platform"};
  const auto first = run(with(cmd, out));
  ASSERT_EQ(first.code, 0) << first.err;
  const auto a = json::parse(first.out);
  const auto b = json::parse(run(with(cmd, out)).out);
  EXPECT_EQ(b["amount_of_bugs"].get<int>(), a["amount_of_bugs"].get<int>() + 1);
  EXPECT_EQ(a["pending"], 1);
  EXPECT_EQ(b["pending"], 2);
  EXPECT_FALSE(b["stale"].get<bool>());
}

TEST_F(CliTest, InsufficientDataExitsThree) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run(with({"ingest", "--min-fixed", "100000"}, out)).code, 0);
  EXPECT_EQ(run(with({"train"}, out)).code, 3);
}

TEST_F(CliTest, BadHeaderExitsTwo) {
  const auto bad = dir_ / "bad.csv";
  std::ofstream(bad) << "foo,bar\n1,2\n";
  EXPECT_EQ(run({"ingest", "--dataset", bad.string(), "--out", (dir_ / "out").string()}).code, 2);
}

TEST_F(CliTest, UnknownOptionExitsOne) { EXPECT_EQ(run({"ingest", "--no-such-flag"}).code, 1); }

TEST_F(CliTest, ConfigFileAndFlagsShareHash) {
  const auto cfg = dir_ / "experiment.json";
  std::ofstream(cfg) << R"({"dataset": "planted.csv", "out": "out", "seed": 42})";
  const auto a = run({"ingest", "--config", cfg.string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(fs::exists(dir_ / "out" / bugtriage::cli::kCorpusFile));
  const auto b = run(with({"ingest", "--seed", "42"}, dir_ / "out2"));
  EXPECT_EQ(json::parse(slurp(dir_ / "out" / bugtriage::cli::kStatsFile))["config_hash"],
            json::parse(slurp(dir_ / "out2" / bugtriage::cli::kStatsFile))["config_hash"]);
}

TEST(BundledFixture, MatchesGenerator) {
  std::ostringstream out, err;
  ASSERT_EQ(bugtriage::cli::run_cli(std::vector<std::string>{"bugtriage", "synth", "-q"}, out, err), 0);
  EXPECT_EQ(slurp(fs::path(BUGTRIAGE_SOURCE_DIR) / "data/fixtures/planted.csv"), out.str());
}

}  // namespace
