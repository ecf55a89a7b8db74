#include "bugtriage/synthetic.hpp"

#include <algorithm>
#include <numeric>

#include "bugtriage/common.hpp"

namespace bugtriage::synthetic {

namespace {

// Shared filler shows up for every developer so that scores are not trivially
// 0/1; none of it is a stopword.
const std::vector<std::string> kFiller = {"issue",   "problem",  "report",  "version", "update", "user",
                                          "release", "behavior", "observed", "expected", "steps", "workspace"};

std::string pick(const std::vector<std::string>& words, Rng& rng) { return words[rng.below(words.size())]; }

std::string sentence(const PlantedDeveloper& dev, std::size_t length, double own_share, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < length; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += rng.uniform() < own_share ? pick(dev.vocabulary, rng) : pick(kFiller, rng);
  }
  return out;
}

}  // namespace

PlantedLdaCorpus planted_lda_corpus(std::size_t num_docs, std::size_t num_topics, std::size_t words_per_topic,
                                    std::size_t doc_length, std::uint64_t seed) {
  if (num_docs == 0 || num_topics == 0 || words_per_topic == 0 || doc_length == 0) {
    throw ArgumentError("planted_lda_corpus: all sizes must be positive");
  }
  PlantedLdaCorpus c;
  const auto K = static_cast<Eigen::Index>(num_topics);
  c.vocab_size = num_topics * words_per_topic;
  c.phi = topics::ProbMatrix::Zero(K, static_cast<Eigen::Index>(c.vocab_size));
  // Within a block, word i has weight proportional to 1 / (i + 1).
  for (Eigen::Index k = 0; k < K; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < words_per_topic; ++i) total += 1.0 / static_cast<double>(i + 1);
    for (std::size_t i = 0; i < words_per_topic; ++i) {
      c.phi(k, static_cast<Eigen::Index>(static_cast<std::size_t>(k) * words_per_topic + i)) =
          (1.0 / static_cast<double>(i + 1)) / total;
    }
  }
  Rng rng(seed);
  c.theta.resize(static_cast<Eigen::Index>(num_docs), K);
  std::vector<double> mix(num_topics), row(c.vocab_size);
  for (std::size_t d = 0; d < num_docs; ++d) {
    double total = 0.0;
    for (auto& m : mix) {
      m = rng.uniform() + 1e-3;
      total += m;
    }
    for (std::size_t k = 0; k < num_topics; ++k) {
      mix[k] /= total;
      c.theta(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k)) = mix[k];
    }
    topics::TokenSeq doc;
    doc.reserve(doc_length);
    for (std::size_t i = 0; i < doc_length; ++i) {
      const auto k = static_cast<Eigen::Index>(rng.discrete(mix));
      for (std::size_t w = 0; w < c.vocab_size; ++w) row[w] = c.phi(k, static_cast<Eigen::Index>(w));
      doc.push_back(static_cast<std::uint32_t>(rng.discrete(row)));
    }
    c.docs.push_back(std::move(doc));
  }
  return c;
}

const std::vector<PlantedDeveloper>& planted_developers() {
  static const std::vector<PlantedDeveloper> devs = {
      {"crash.dev@example.org", "Core",
       {"crash", "segfault", "nullpointer", "stacktrace", "coredump", "abort", "exception", "overflow", "deadlock",
        "hang", "corruption", "assertion"},
       {1, 2}, {1, 2, 3}},
      {"ui.dev@example.org", "UI",
       {"button", "dialog", "toolbar", "menu", "layout", "font", "icon", "widget", "tooltip", "scrollbar", "theme",
        "sidebar"},
       {3, 4}, {4, 5, 6}},
      {"network.dev@example.org", "Net",
       {"proxy", "socket", "timeout", "dns", "http", "certificate", "handshake", "latency", "firewall", "packet",
        "bandwidth", "redirect"},
       {2, 3}, {2, 3, 4}},
      {"build.dev@example.org", "Build",
       {"compiler", "linker", "makefile", "toolchain", "dependency", "artifact", "pipeline", "maven", "gradle",
        "classpath", "bootstrap", "packaging"},
       {2, 3, 4}, {3, 4}},
      {"docs.dev@example.org", "Doc",
       {"documentation", "tutorial", "javadoc", "typo", "wording", "example", "manual", "glossary", "paragraph",
        "chapter", "screenshot", "translation"},
       {4, 5}, {5, 6, 7}},
      {"perf.dev@example.org", "Perf",
       {"slow", "sluggish", "throughput", "profiler", "benchmark", "cache", "memory", "allocation", "garbage",
        "startup", "indexing", "regression"},
       {1, 2, 3}, {2, 3, 4}},
  };
  return devs;
}

corpus::BugReport planted_report(const PlantedDeveloper& dev, const std::string& id, Timestamp created,
                                 std::uint64_t seed) {
  Rng rng(seed);
  corpus::BugReport r;
  r.id = id;
  r.product = "Platform";
  r.component = dev.component;
  r.title = sentence(dev, 4 + rng.below(3), 0.8, rng);
  r.description = sentence(dev, 15 + rng.below(11), 0.7, rng);
  const std::size_t comments = rng.below(3);
  for (std::size_t i = 0; i < comments; ++i) r.comments.push_back(sentence(dev, 5 + rng.below(6), 0.6, rng));
  r.priority = dev.priorities[rng.below(dev.priorities.size())];
  r.severity = dev.severities[rng.below(dev.severities.size())];
  r.status = "RESOLVED";
  r.resolution = "FIXED";
  r.assignee = dev.id;
  r.created_time = created;
  r.resolved_time = created + std::chrono::hours(24 * (1 + static_cast<int>(rng.below(20))));
  return r;
}

std::vector<corpus::BugReport> planted_project(const PlantedProjectConfig& cfg) {
  const auto& devs = planted_developers();
  Rng rng(cfg.seed);
  const std::size_t total = cfg.reports_per_developer * devs.size();

  // Interleave developers in a shuffled order so every one of them stays
  // active over the whole period.
  std::vector<std::size_t> owner(total);
  for (std::size_t i = 0; i < total; ++i) owner[i] = i % devs.size();
  for (std::size_t i = total; i > 1; --i) std::swap(owner[i - 1], owner[rng.below(i)]);

  const Timestamp start = make_timestamp(2012, 1, 1);
  const double span_seconds = 365.0 * 86400.0;
  std::vector<corpus::BugReport> out;
  out.reserve(total + cfg.noise_reports);
  std::vector<bool> seen(devs.size(), false);
  for (std::size_t i = 0; i < total; ++i) {
    const auto& dev = devs[owner[i]];
    const auto offset = static_cast<long long>(span_seconds * static_cast<double>(i) / static_cast<double>(total)) +
                        static_cast<long long>(rng.below(3600));
    const Timestamp created = start + std::chrono::seconds(offset);
    auto r = planted_report(dev, std::to_string(100000 + i), created, rng.next());
    if (!seen[owner[i]]) {
      seen[owner[i]] = true;
      r.priority = dev.priorities.front();
      r.severity = dev.severities.front();
    }
    out.push_back(std::move(r));
  }

  const std::vector<std::string> generic = {"nobody@example.org", "unassigned", "platform-inbox@example.org", ""};
  for (std::size_t i = 0; i < cfg.noise_reports; ++i) {
    const auto& dev = devs[rng.below(devs.size())];
    const auto offset = static_cast<long long>(rng.uniform() * span_seconds);
    auto r = planted_report(dev, std::to_string(900000 + i), start + std::chrono::seconds(offset), rng.next());
    if (i % 2 == 0) {
      r.assignee = generic[rng.below(generic.size())];
      if (r.assignee.empty()) r.assignee = std::string(corpus::kUnassigned);
    } else {
      r.resolution = i % 3 == 0 ? "WONTFIX" : "DUPLICATE";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bugtriage::synthetic
