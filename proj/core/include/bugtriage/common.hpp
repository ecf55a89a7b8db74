#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bugtriage {

using Timestamp = std::chrono::sys_seconds;

// Error taxonomy. The CLI maps these onto process exit codes.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or unreadable input data (CSV files, model artifacts).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input is well-formed but too small to do what was asked.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trained artifact (model directory, index, state file) is missing.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses ISO-8601 UTC timestamps ("2001-10-10T00:00:00Z", "2001-10-10",
/// optional fractional seconds and +hh:mm offsets) and the fallback form
/// "YYYY-MM-DD HH:MM:SS". Returns nullopt on anything else.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);

/// "YYYY-MM-DD"
std::string format_date(Timestamp t);

/// "YYYY-MM"
std::string format_month(Timestamp t);

/// Days since 1970-01-01 (floored).
std::int64_t day_number(Timestamp t);

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                         int second = 0);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

/// FNV-1a, used for stable content hashes in logs and artifacts.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// Whole-file read. Throws MissingArtifactError when the file does not exist
/// and DataError when it cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partial file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Seeded generator with platform-independent draws. std::uniform_*_distribution
// is implementation-defined, so draws are derived from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 bits of randomness.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Index drawn proportionally to non-negative weights. Falls back to the
  /// last positive weight when rounding pushes the draw past the total.
  std::size_t discrete(std::span<const double> weights);

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

  std::uint64_t next() { return engine_(); }

  /// Textual engine state; restore() resumes the exact stream.
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bugtriage
