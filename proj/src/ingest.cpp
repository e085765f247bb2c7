#include "dirmap/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace dirmap {

std::vector<Observation> headings_from_track(std::span<const TrackPoint> points, double min_step) {
  if (!(min_step >= 0.0)) {
    throw std::domain_error("headings_from_track: min_step must be non-negative");
  }
  std::vector<Observation> out;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const TrackPoint& a = points[i - 1];
    const TrackPoint& b = points[i];
    if (!(b.t > a.t)) {
      throw std::domain_error("headings_from_track: t must be strictly increasing within track " +
                              a.track_id);
    }
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    if (std::hypot(dx, dy) < min_step || (dx == 0.0 && dy == 0.0)) {
      continue;
    }
    out.push_back({a.t, a.track_id, a.x, a.y, Angle(std::atan2(dy, dx))});
  }
  return out;
}

std::vector<Observation> headings_from_tracks(std::span<const TrackPoint> points, double min_step) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<TrackPoint>> tracks;
  for (const TrackPoint& p : points) {
    auto [it, inserted] = tracks.try_emplace(p.track_id);
    if (inserted) {
      order.push_back(p.track_id);
    }
    it->second.push_back(p);
  }
  std::vector<Observation> out;
  for (const std::string& id : order) {
    auto& track = tracks[id];
    std::stable_sort(track.begin(), track.end(),
                     [](const TrackPoint& a, const TrackPoint& b) { return a.t < b.t; });
    const auto headings = headings_from_track(track, min_step);
    out.insert(out.end(), headings.begin(), headings.end());
  }
  return out;
}

namespace {

// Absent track ids sort before present ones.
auto order_key(const Observation& o) {
  return std::make_tuple(o.t, o.track_id.has_value(), o.track_id.value_or(std::string()), o.x, o.y,
                         o.theta.radians());
}

}  // namespace

ObservationStore::ObservationStore(GridSpec spec, std::vector<Observation> observations)
    : spec_(spec), obs_(std::move(observations)) {
  spec_.validate();
  std::stable_sort(obs_.begin(), obs_.end(),
                   [](const Observation& a, const Observation& b) { return order_key(a) < order_key(b); });
  by_cell_.resize(spec_.cell_count());
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    const Observation& o = obs_[i];
    if (o.track_id) {
      by_track_[*o.track_id].push_back(i);
    }
    if (const auto cell = cell_of(spec_, o.x, o.y)) {
      by_cell_[spec_.linear(*cell)].push_back(i);
    } else {
      outside_.push_back(i);
    }
  }
}

std::vector<Angle> ObservationStore::slice_spatial(double t_lo, double t_hi) const {
  if (!(t_lo <= t_hi)) {
    throw std::domain_error("slice_spatial: t_lo must not exceed t_hi");
  }
  const auto lo = std::lower_bound(obs_.begin(), obs_.end(), t_lo,
                                   [](const Observation& o, double t) { return o.t < t; });
  const auto hi = std::upper_bound(obs_.begin(), obs_.end(), t_hi,
                                   [](double t, const Observation& o) { return t < o.t; });
  std::vector<Angle> out;
  for (auto it = lo; it < hi; ++it) {
    out.push_back(it->theta);
  }
  return out;
}

std::vector<Angle> ObservationStore::slice_track(const std::string& track_id) const {
  const auto it = by_track_.find(track_id);
  if (it == by_track_.end()) {
    std::string known;
    for (const auto& id : track_ids()) {
      known += (known.empty() ? "" : ", ") + id;
    }
    throw std::domain_error("slice_track: unknown track '" + track_id + "'; known tracks: " +
                            (known.empty() ? "(none)" : known));
  }
  std::vector<Angle> out;
  for (std::size_t i : it->second) {
    out.push_back(obs_[i].theta);
  }
  return out;
}

std::vector<Angle> ObservationStore::slice_cell(std::size_t col, std::size_t row) const {
  std::vector<Angle> out;
  for (const Observation& o : cell_observations(col, row)) {
    out.push_back(o.theta);
  }
  return out;
}

std::vector<Observation> ObservationStore::cell_observations(std::size_t col, std::size_t row) const {
  if (!spec_.contains({col, row})) {
    throw std::domain_error("slice_cell: cell (" + std::to_string(col) + ", " + std::to_string(row) +
                            ") outside a " + std::to_string(spec_.n_cols) + "x" +
                            std::to_string(spec_.n_rows) + " grid");
  }
  std::vector<Observation> out;
  for (std::size_t i : by_cell_[spec_.linear({col, row})]) {
    out.push_back(obs_[i]);
  }
  return out;
}

std::vector<std::string> ObservationStore::track_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : by_track_) {
    ids.push_back(id);
  }
  return ids;
}

}  // namespace dirmap
