#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bugtriage/corpus.hpp"
#include "bugtriage/csv.hpp"
#include "bugtriage/synthetic.hpp"

namespace bugtriage::corpus {
namespace {

const std::string kHeader =
    "Issue_id,Product,Component,Title,Description,Priority,Severity,Status,Resolution,Assignee,Created_time,"
    "Resolved_time,Comments\n";

BugReport make(std::string id, std::string assignee, Timestamp created, std::string resolution = "FIXED") {
  BugReport r;
  r.id = std::move(id);
  r.product = "Platform";
  r.component = "UI";
  r.title = "title " + r.id;
  r.assignee = std::move(assignee);
  r.resolution = std::move(resolution);
  r.status = "RESOLVED";
  r.created_time = created;
  return r;
}

void expect_same(const BugReport& a, const BugReport& b) {
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.product, b.product);
  EXPECT_EQ(a.component, b.component);
  EXPECT_EQ(a.title, b.title);
  EXPECT_EQ(a.description, b.description);
  EXPECT_EQ(a.comments, b.comments);
  EXPECT_EQ(a.priority, b.priority);
  EXPECT_EQ(a.severity, b.severity);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.resolution, b.resolution);
  EXPECT_EQ(a.assignee, b.assignee);
  EXPECT_EQ(a.created_time, b.created_time);
  EXPECT_EQ(a.resolved_time, b.resolved_time);
}

TEST(ParseCsv, MapsFieldsDirectly) {
  const auto parsed = parse_csv_text(kHeader +
                                     "1518,Platform,UI,Opening fails,details,P2,major,RESOLVED,FIXED,dev@x.org,"
                                     "2001-10-10T00:00:00Z,,\n");
  ASSERT_EQ(parsed.reports.size(), 1u);
  const auto& r = parsed.reports[0];
  EXPECT_EQ(r.id, "1518");
  EXPECT_EQ(r.product, "Platform");
  EXPECT_EQ(r.component, "UI");
  EXPECT_EQ(r.created_time, make_timestamp(2001, 10, 10));
  EXPECT_EQ(r.priority, 2);
  EXPECT_EQ(r.severity, 3);
  EXPECT_FALSE(r.resolved_time.has_value());
}

TEST(ParseCsv, HeaderOnlyGivesNothing) {
  const auto parsed = parse_csv_text(kHeader);
  EXPECT_TRUE(parsed.reports.empty());
  EXPECT_TRUE(parsed.rejects.empty());
}

TEST(ParseCsv, BadTimestampIsRejectedWithRowNumber) {
  const auto parsed = parse_csv_text(kHeader +
                                     "1,P,C,ok,,P3,normal,RESOLVED,FIXED,a,2001-10-10,,\n"
                                     "2,P,C,bad,,P3,normal,RESOLVED,FIXED,a,not-a-date,,\n");
  ASSERT_EQ(parsed.reports.size(), 1u);
  ASSERT_EQ(parsed.rejects.size(), 1u);
  EXPECT_EQ(parsed.rejects[0].row, 2u);
  EXPECT_EQ(parsed.rejects[0].reason, "bad timestamp");
}

TEST(ParseCsv, FallbackTimestampAndDuplicates) {
  const auto parsed = parse_csv_text(kHeader +
                                     "1,P,C,a,,P3,normal,RESOLVED,FIXED,a,2001-10-10 12:30:00,,\n"
                                     "1,P,C,b,,P3,normal,RESOLVED,FIXED,a,2001-10-11,,\n");
  ASSERT_EQ(parsed.reports.size(), 1u);
  EXPECT_EQ(parsed.reports[0].created_time, make_timestamp(2001, 10, 10, 12, 30));
  ASSERT_EQ(parsed.rejects.size(), 1u);
  EXPECT_EQ(parsed.rejects[0].reason, "duplicate id");
}

TEST(ParseCsv, MissingRequiredColumnIsFatal) {
  EXPECT_THROW(parse_csv_text("Issue_id,Title\n1,x\n"), DataError);
}

TEST(ParseCsv, RoundTripIsIdentity) {
  synthetic::PlantedProjectConfig cfg;
  cfg.reports_per_developer = 5;
  cfg.noise_reports = 6;
  auto reports = synthetic::planted_project(cfg);
  reports[0].title = "quoted \"title\", with comma";
  reports[1].description = "line one\nline two";
  reports[2].comments = {"first, comment", "second \"quoted\""};
  std::ostringstream out;
  write_csv(out, reports);
  const auto parsed = parse_csv_text(out.str());
  ASSERT_TRUE(parsed.rejects.empty());
  ASSERT_EQ(parsed.reports.size(), reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) expect_same(parsed.reports[i], reports[i]);
}

TEST(Csv, QuotedFieldsAndCrlf) {
  const auto records = csv::parse("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\r\n");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0], (csv::Record{"a", "b,c", "d\"e"}));
  EXPECT_EQ(records[1], (csv::Record{"1", "2", "3"}));
  EXPECT_THROW(csv::parse("\"open"), DataError);
}

TEST(FilterCorpus, KeepsQualifyingDeveloper) {
  std::vector<BugReport> reports;
  for (int i = 0; i < 10; ++i) reports.push_back(make(std::to_string(i), "dev@x.org", make_timestamp(2012, 1, 1 + i)));
  FilterConfig cfg;
  cfg.min_fixed = 5;
  const auto result = filter_corpus(reports, cfg);
  EXPECT_EQ(result.kept.size(), 10u);
  EXPECT_EQ(result.stats.final_developers, 1u);
  EXPECT_EQ(result.stats.final_amount, 10u);
}

TEST(FilterCorpus, ResolutionFilterCanEmptyCorpus) {
  std::vector<BugReport> reports;
  for (int i = 0; i < 4; ++i) {
    reports.push_back(make(std::to_string(i), "dev@x.org", make_timestamp(2012, 1, 1 + i), "DUPLICATE"));
  }
  FilterConfig cfg;
  cfg.min_fixed = 1;
  EXPECT_TRUE(filter_corpus(reports, cfg).kept.empty());
}

TEST(FilterCorpus, BlacklistMatchesSubstrings) {
  FilterConfig cfg;
  EXPECT_TRUE(is_generic_assignee("platform-ui-inbox@eclipse.org", cfg));
  EXPECT_TRUE(is_generic_assignee("Nobody", cfg));
  EXPECT_TRUE(is_generic_assignee("", cfg));
  EXPECT_FALSE(is_generic_assignee("alice@example.org", cfg));
}

TEST(FilterCorpus, IdempotentAndStatsMatchBruteForce) {
  const auto reports = synthetic::planted_project();
  FilterConfig cfg;
  const auto once = filter_corpus(reports, cfg);
  const auto twice = filter_corpus(once.kept, cfg);
  ASSERT_EQ(once.kept.size(), twice.kept.size());
  for (std::size_t i = 0; i < once.kept.size(); ++i) expect_same(once.kept[i], twice.kept[i]);

  std::set<std::string> combos, products, components, developers;
  for (const auto& r : reports) {
    combos.insert(to_lower(r.product) + "/" + to_lower(r.component));
    products.insert(to_lower(r.product));
    components.insert(to_lower(r.component));
    developers.insert(r.assignee);
  }
  EXPECT_EQ(once.stats.amount, reports.size());
  EXPECT_EQ(once.stats.combinations, combos.size());
  EXPECT_EQ(once.stats.final_developers, 6u);
  EXPECT_EQ(once.stats.final_amount, 600u);
}

TEST(ChronologicalSplit, CeilRule) {
  std::vector<BugReport> reports;
  for (int i = 10; i >= 1; --i) reports.push_back(make("d" + std::to_string(i), "a", make_timestamp(2012, 1, i)));
  const auto split = chronological_split(reports, 0.8);
  ASSERT_EQ(split.train.size(), 8u);
  ASSERT_EQ(split.test.size(), 2u);
  EXPECT_EQ(split.train.front().id, "d1");
  EXPECT_EQ(split.test[0].id, "d9");
  EXPECT_EQ(split.test[1].id, "d10");

  const auto single = chronological_split({make("x", "a", make_timestamp(2012, 1, 1))}, 0.8);
  EXPECT_EQ(single.train.size(), 1u);
  EXPECT_TRUE(single.test.empty());
  EXPECT_THROW(chronological_split(reports, 1.0), ArgumentError);
}

TEST(ChronologicalSplit, EqualTimestampsBreakByLowestId) {
  std::vector<BugReport> reports;
  for (const char* id : {"e", "c", "a", "d", "b"}) reports.push_back(make(id, "a", make_timestamp(2012, 1, 1)));
  const auto split = chronological_split(reports, 0.6);
  ASSERT_EQ(split.train.size(), 3u);
  EXPECT_EQ(split.train[0].id, "a");
  EXPECT_EQ(split.train[1].id, "b");
  EXPECT_EQ(split.train[2].id, "c");
}

TEST(PerDeveloperSplit, SplitsEachGroup) {
  std::vector<BugReport> reports;
  for (int i = 0; i < 5; ++i) reports.push_back(make("a" + std::to_string(i), "A", make_timestamp(2012, 1, 1 + i)));
  for (int i = 0; i < 10; ++i) reports.push_back(make("b" + std::to_string(i), "B", make_timestamp(2012, 2, 1 + i)));
  const auto split = per_developer_split(reports, 0.8);
  EXPECT_EQ(split.at("A").train.size(), 4u);
  EXPECT_EQ(split.at("A").test.size(), 1u);
  EXPECT_EQ(split.at("B").train.size(), 8u);
  EXPECT_EQ(split.at("B").test.size(), 2u);
}

TEST(PerDeveloperSplit, TrainNeverAfterTestOnRandomCorpora) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BugReport> reports;
    const auto n = 5 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      reports.push_back(make(std::to_string(i), "dev" + std::to_string(rng.below(4)),
                             make_timestamp(2012, 1, 1) + std::chrono::hours(rng.below(2000))));
    }
    const double ratio = 0.1 + 0.8 * rng.uniform();
    for (const auto& [dev, s] : per_developer_split(reports, ratio)) {
      for (const auto& tr : s.train) {
        for (const auto& te : s.test) EXPECT_LE(tr.created_time, te.created_time) << dev;
      }
    }
    const auto global = chronological_split(reports, ratio);
    for (const auto& tr : global.train) {
      for (const auto& te : global.test) EXPECT_LE(tr.created_time, te.created_time);
    }
  }
}

TEST(Labels, PriorityAndSeverityRanks) {
  EXPECT_EQ(priority_rank("P1"), 1);
  EXPECT_EQ(priority_rank(""), kDefaultPriority);
  EXPECT_EQ(severity_rank("blocker"), 1);
  EXPECT_EQ(severity_rank("enhancement"), 7);
  EXPECT_EQ(severity_rank("--"), kDefaultSeverity);
  EXPECT_FALSE(priority_rank("P9").has_value());
}

}  // namespace
}  // namespace bugtriage::corpus
