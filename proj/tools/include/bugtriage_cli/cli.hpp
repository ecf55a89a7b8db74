#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bugtriage::cli {

// Artifact names under --out.
inline constexpr const char* kCorpusFile = "corpus.csv";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kRejectsFile = "rejects.csv";
inline constexpr const char* kStateFile = "state.json";
inline constexpr const char* kProfilesDir = "profiles";
inline constexpr const char* kEvalRunFile = "eval_run.json";
inline constexpr const char* kTablesMarkdownFile = "tables.md";
inline constexpr const char* kTablesCsvFile = "tables.csv";

/// Runs one command line. JSON results go to `out`, logs and diagnostics to
/// `err`. Returns the process exit code: 0 ok, 2 unreadable input data,
/// 3 insufficient data, 4 missing artifacts, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with argv[0] supplied.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bugtriage::cli
