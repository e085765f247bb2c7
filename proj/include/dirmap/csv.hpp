#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dirmap/ingest.hpp"

namespace dirmap {

/// Raised when a CSV cannot be loaded. The message names the first offending
/// line, e.g. "line 2: x not numeric".
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::string& message, std::size_t line) : std::runtime_error(message), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvOptions {
  /// Number of malformed rows tolerated (and skipped) before the load fails.
  std::size_t error_budget = 0;
};

struct CsvData {
  /// Schema A (`t,track_id,x,y`) yields track points, schema B
  /// (`t,track_id,x,y,theta`) observations.
  std::variant<std::vector<TrackPoint>, std::vector<Observation>> records;
  /// One message per skipped row.
  std::vector<std::string> diagnostics;
};

CsvData parse_csv(std::istream& in, const CsvOptions& options = {});
CsvData load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Observations from either schema; track points go through
/// headings_from_tracks.
std::vector<Observation> to_observations(const CsvData& data, double min_step = kDefaultMinStep);

void write_tracks_csv(std::ostream& out, std::span<const TrackPoint> points);
void write_observations_csv(std::ostream& out, std::span<const Observation> observations);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace dirmap
