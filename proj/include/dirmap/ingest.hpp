#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirmap/angle.hpp"
#include "dirmap/grid.hpp"

namespace dirmap {

struct TrackPoint {
  double t = 0.0;
  std::string track_id;
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

/// One heading sample at a place and time.
struct Observation {
  double t = 0.0;
  std::optional<std::string> track_id;
  double x = 0.0;
  double y = 0.0;
  Angle theta;

  friend bool operator==(const Observation&, const Observation&) = default;
};

inline constexpr double kDefaultMinStep = 0.05;  // meters

/// Finite-difference bearings along one track. Each consecutive pair moving at
/// least min_step emits an observation at the first point. Throws
/// std::domain_error if t is not strictly increasing.
std::vector<Observation> headings_from_track(std::span<const TrackPoint> points,
                                             double min_step = kDefaultMinStep);

/// Groups points by track_id (first-appearance order), orders each track by t
/// and extracts headings track by track.
std::vector<Observation> headings_from_tracks(std::span<const TrackPoint> points,
                                              double min_step = kDefaultMinStep);

/// Immutable store indexed by time, track and grid cell. Slices come back in
/// a canonical order (t, track_id, x, y, theta) that does not depend on the
/// order observations were inserted in.
class ObservationStore {
 public:
  ObservationStore(GridSpec spec, std::vector<Observation> observations);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t size() const { return obs_.size(); }
  [[nodiscard]] std::span<const Observation> observations() const { return obs_; }

  /// Headings with t in the closed window [t_lo, t_hi].
  [[nodiscard]] std::vector<Angle> slice_spatial(double t_lo, double t_hi) const;
  /// One track's headings in time order. Unknown ids throw std::domain_error.
  [[nodiscard]] std::vector<Angle> slice_track(const std::string& track_id) const;
  /// Headings located in one cell. Out-of-range indexes throw.
  [[nodiscard]] std::vector<Angle> slice_cell(std::size_t col, std::size_t row) const;
  /// Observations of one cell, canonical order.
  [[nodiscard]] std::vector<Observation> cell_observations(std::size_t col, std::size_t row) const;

  [[nodiscard]] std::size_t outside_count() const { return outside_.size(); }
  [[nodiscard]] std::vector<std::string> track_ids() const;

 private:
  GridSpec spec_;
  std::vector<Observation> obs_;  // canonical order, doubles as the time index
  std::map<std::string, std::vector<std::size_t>> by_track_;
  std::vector<std::vector<std::size_t>> by_cell_;
  std::vector<std::size_t> outside_;
};

}  // namespace dirmap
