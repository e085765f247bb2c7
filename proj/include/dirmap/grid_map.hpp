#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirmap/grid.hpp"
#include "dirmap/ingest.hpp"
#include "dirmap/vmm.hpp"

namespace dirmap {

struct CellModel {
  CellIndex index;
  std::optional<VonMisesMixture> mixture;  // empty while unobserved
  std::size_t n_obs = 0;
  std::optional<EmReport> report;
  /// Per-component responsibility-weighted resultant sums (one entry in vm
  /// mode). These back online updates and are not part of the saved state.
  std::vector<ResultantSums> stats;

  [[nodiscard]] bool observed() const { return n_obs > 0; }
};

class DirectionalGridMap {
 public:
  /// All cells unobserved.
  DirectionalGridMap(GridSpec spec, FitMode mode);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] FitMode mode() const { return mode_; }
  [[nodiscard]] std::span<const CellModel> cells() const { return cells_; }
  [[nodiscard]] const CellModel& cell(CellIndex c) const { return cells_.at(spec_.linear(c)); }
  [[nodiscard]] std::size_t observed_count() const;

  /// Set by build when no observation fell inside the grid.
  [[nodiscard]] bool no_observations() const { return no_observations_; }
  [[nodiscard]] std::size_t outside_count() const { return outside_; }

  /// Spec, mode, and per-cell (n_obs, mixture) compared exactly.
  friend bool operator==(const DirectionalGridMap& a, const DirectionalGridMap& b);

 private:
  friend DirectionalGridMap build(std::span<const Observation>, const GridSpec&, FitMode, const EmConfig&);
  friend DirectionalGridMap update_online(const DirectionalGridMap&, std::span<const Observation>,
                                          const EmConfig&);
  friend DirectionalGridMap load_map(std::istream&);

  GridSpec spec_;
  FitMode mode_;
  std::vector<CellModel> cells_;
  bool no_observations_ = false;
  std::size_t outside_ = 0;
};

/// Buckets observations by cell (input order preserved) and fits each
/// non-empty cell independently.
DirectionalGridMap build(std::span<const Observation> observations, const GridSpec& spec,
                         FitMode mode, const EmConfig& config);
DirectionalGridMap build(const ObservationStore& store, FitMode mode, const EmConfig& config);

struct Site {
  double x = 0.0;
  double y = 0.0;
};

struct SiteSet {
  std::vector<Site> sites;
  double radius = 1.0;
};

struct SiteModel {
  Site site;
  std::optional<VonMisesMixture> mixture;
  std::size_t n_obs = 0;
  std::optional<EmReport> report;
};

/// Fits each site from the observations within `radius` of it. Sites may
/// overlap. Throws std::domain_error on an empty set or non-positive radius.
std::vector<SiteModel> build_at_sites(std::span<const Observation> observations, const SiteSet& sites,
                                      FitMode mode, const EmConfig& config);

struct QueryResult {
  double density = 0.0;
  bool observed = false;
};

/// Density of the containing cell's mixture, or the uniform density with
/// observed = false for unobserved cells and points off the grid.
QueryResult query(const DirectionalGridMap& map, double x, double y, Angle theta);

/// Folds new observations into the map. In vm mode the sufficient statistics
/// are extended sample by sample, so the result equals a batch build over all
/// data seen so far. In vmm mode touched cells run EM on the new samples with
/// the earlier component statistics held fixed, and gain components only when
/// a fresh fit of the new samples explains them better.
DirectionalGridMap update_online(const DirectionalGridMap& map, std::span<const Observation> observations,
                                 const EmConfig& config);
/// Throws std::domain_error when the store's grid differs from the map's.
DirectionalGridMap update_online(const DirectionalGridMap& map, const ObservationStore& store,
                                 const EmConfig& config);

/// Raised by load_map. line() is 1-based; field() names the offending field
/// (empty when the whole line is at fault).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message);
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Text format:
///   DGM v1 <n_cols> <n_rows> <x_min> <y_min> <x_max> <y_max> <VM|VMM>
///   cell <col> <row> <n_obs> M=<m> <alpha> <mu> <kappa> ...   (observed cells)
///   end <cell lines>
void save_map(std::ostream& out, const DirectionalGridMap& map);
std::string save_map(const DirectionalGridMap& map);
DirectionalGridMap load_map(std::istream& in);
DirectionalGridMap load_map(const std::string& text);

}  // namespace dirmap
