#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "dirmap/ingest.hpp"
#include "dirmap/vmm.hpp"

namespace dirmap {

/// Average negative log density. Throws std::domain_error on empty data.
double enll(const VonMisesMixture& mix, std::span<const Angle> thetas);

/// Seeded shuffle of 0..n-1 cut into k contiguous folds (sizes differ by at
/// most one). Throws std::domain_error when n < k or k < 2.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

using Fitter = std::function<VonMisesMixture(std::span<const Angle>)>;

/// Mean over folds of the average held-out density under a model fitted on
/// the other folds.
double apd_cv(std::span<const Angle> thetas, const Fitter& fit, std::size_t k, std::uint64_t seed);
double apd_cv(std::span<const Angle> thetas, FitMode mode, std::size_t k, const EmConfig& config,
              std::uint64_t seed);

/// Mean squared wrapped distance from each angle to its nearest density mode.
/// Throws std::domain_error for a uniform mixture (no modes).
double mse_closest_mode(const VonMisesMixture& mix, std::span<const Angle> thetas);

/// KL(p || q) by the periodic trapezoid rule on n_grid points.
double kl_divergence(const VonMisesMixture& p, const VonMisesMixture& q, std::size_t n_grid = 7200);

struct MetricReport {
  FitMode method = FitMode::vm;
  double enll = 0.0;              // held-out, averaged over folds
  double apd = 0.0;               // held-out, averaged over folds
  double mse_closest_mode = 0.0;  // in-sample, radians^2
  std::vector<double> fit_ms;     // one entry per fold fit
  std::size_t samples = 0;

  [[nodiscard]] double fit_ms_mean() const;
  [[nodiscard]] double fit_ms_sd() const;
};

std::string_view method_name(FitMode mode);  // "DGM-VM" / "DGM-VMM"

struct Comparison {
  MetricReport vm;
  MetricReport vmm;
};

/// Both pipelines over identical folds. Throws std::domain_error when there
/// are fewer samples than folds.
Comparison compare(std::span<const Angle> thetas, const EmConfig& config, std::uint64_t seed,
                   std::size_t folds = 10);

struct CellComparison {
  Comparison totals;  // sample-weighted means over the evaluated cells
  std::size_t cells_evaluated = 0;
  std::size_t cells_skipped = 0;  // observed but fewer samples than folds
};

/// compare() per grid cell, aggregated. Cells with fewer samples than folds
/// are skipped; throws std::domain_error if no cell qualifies.
CellComparison compare_cells(const ObservationStore& store, const EmConfig& config, std::uint64_t seed,
                             std::size_t folds = 10);

}  // namespace dirmap
