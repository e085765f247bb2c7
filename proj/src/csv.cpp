#include "dirmap/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

namespace dirmap {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) {
      return out;
    }
    start = comma + 1;
  }
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') {
    s.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

enum class Schema { tracks, observations };

const std::vector<std::string_view> kTrackColumns{"t", "track_id", "x", "y"};
const std::vector<std::string_view> kObservationColumns{"t", "track_id", "x", "y", "theta"};

struct RowError {
  std::string message;
};

}  // namespace

CsvData parse_csv(std::istream& in, const CsvOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<Schema> schema;
  while (!schema && std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) {
      view.remove_prefix(3);
    }
    if (trim(view).empty()) {
      continue;
    }
    const auto header = split(view);
    if (header == kTrackColumns) {
      schema = Schema::tracks;
    } else if (header == kObservationColumns) {
      schema = Schema::observations;
    } else {
      throw LoadError(fmt::format("line {}: unknown schema, expected header 't,track_id,x,y' or "
                                  "'t,track_id,x,y,theta'",
                                  line_no),
                      line_no);
    }
  }
  if (!schema) {
    throw LoadError("line 1: missing header", 1);
  }

  CsvData data;
  std::vector<TrackPoint> tracks;
  std::vector<Observation> observations;
  const auto& columns = *schema == Schema::tracks ? kTrackColumns : kObservationColumns;
  std::optional<LoadError> first_error;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split(line);
    std::optional<std::string> problem;
    double values[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
    if (fields.size() != columns.size()) {
      problem = fmt::format("expected {} fields, got {}", columns.size(), fields.size());
    } else {
      for (std::size_t c = 0; c < columns.size() && !problem; ++c) {
        if (c == 1) {
          if (*schema == Schema::tracks && fields[c].empty()) {
            problem = "track_id empty";
          }
          continue;
        }
        if (const auto v = parse_number(fields[c])) {
          values[c] = *v;
        } else {
          problem = fmt::format("{} not numeric", columns[c]);
        }
      }
    }
    if (problem) {
      const std::string message = fmt::format("line {}: {}", line_no, *problem);
      if (!first_error) {
        first_error.emplace(message, line_no);
      }
      data.diagnostics.push_back(message);
      if (data.diagnostics.size() > options.error_budget) {
        throw *first_error;
      }
      continue;
    }
    const std::string id(fields[1]);
    if (*schema == Schema::tracks) {
      tracks.push_back({values[0], id, values[2], values[3]});
    } else {
      observations.push_back({values[0], id.empty() ? std::nullopt : std::optional<std::string>(id),
                              values[2], values[3], Angle(values[4])});
    }
  }
  if (*schema == Schema::tracks) {
    data.records = std::move(tracks);
  } else {
    data.records = std::move(observations);
  }
  return data;
}

CsvData load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open " + path.string(), 0);
  }
  return parse_csv(in, options);
}

std::vector<Observation> to_observations(const CsvData& data, double min_step) {
  if (const auto* obs = std::get_if<std::vector<Observation>>(&data.records)) {
    return *obs;
  }
  return headings_from_tracks(std::get<std::vector<TrackPoint>>(data.records), min_step);
}

std::string format_double(double v) {
  return fmt::format("{}", v);
}

void write_tracks_csv(std::ostream& out, std::span<const TrackPoint> points) {
  out << "t,track_id,x,y\n";
  for (const TrackPoint& p : points) {
    out << fmt::format("{},{},{},{}\n", p.t, p.track_id, p.x, p.y);
  }
}

void write_observations_csv(std::ostream& out, std::span<const Observation> observations) {
  out << "t,track_id,x,y,theta\n";
  for (const Observation& o : observations) {
    out << fmt::format("{},{},{},{},{}\n", o.t, o.track_id.value_or(""), o.x, o.y, o.theta.radians());
  }
}

}  // namespace dirmap
