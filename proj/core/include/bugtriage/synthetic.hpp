#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bugtriage/corpus.hpp"
#include "bugtriage/lda.hpp"

namespace bugtriage::synthetic {

/// Documents drawn from a known LDA generator. Topic k puts all of its mass
/// on its own block of words; per-document mixtures are (u, 1 - u) style
/// draws so both topics appear in most documents.
struct PlantedLdaCorpus {
  std::vector<topics::TokenSeq> docs;
  std::size_t vocab_size = 0;
  topics::ProbMatrix phi;    // K x V
  topics::ProbMatrix theta;  // D x K
};

PlantedLdaCorpus planted_lda_corpus(std::size_t num_docs = 100, std::size_t num_topics = 2,
                                    std::size_t words_per_topic = 10, std::size_t doc_length = 50,
                                    std::uint64_t seed = 42);

struct PlantedDeveloper {
  std::string id;
  std::string component;
  std::vector<std::string> vocabulary;  // disjoint across developers
  std::vector<int> priorities;          // drawn uniformly; front() is the most urgent
  std::vector<int> severities;
};

/// The six developers of the planted project (crash, ui, network, build,
/// docs, performance).
const std::vector<PlantedDeveloper>& planted_developers();

struct PlantedProjectConfig {
  std::size_t reports_per_developer = 100;
  std::size_t noise_reports = 30;  // unassigned, generic or not FIXED
  std::uint64_t seed = 42;
};

/// Fixed reports for every planted developer spread over one year
/// (2012-01-01 onwards) plus noise rows that the corpus filter removes. The
/// last fifth of the period is shorter than the default activity window, so
/// every developer stays a date-filter candidate for the whole test split.
/// Each developer's earliest report carries its most urgent priority and
/// severity.
std::vector<corpus::BugReport> planted_project(const PlantedProjectConfig& cfg = {});

/// A report written in one developer's vocabulary with that developer's
/// product/component.
corpus::BugReport planted_report(const PlantedDeveloper& dev, const std::string& id, Timestamp created,
                                 std::uint64_t seed);

}  // namespace bugtriage::synthetic
