#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dirmap/circular.hpp"
#include "dirmap/em.hpp"

namespace dirmap {

using MixtureComponent = Weighted<VonMises>;

/// Convex combination of von Mises densities. Weights are non-negative and
/// sum to one (checked to 1e-9 on construction; values are stored as given).
class VonMisesMixture {
 public:
  /// Throws std::domain_error on an empty list, a negative weight or weights
  /// that do not sum to one.
  explicit VonMisesMixture(std::vector<MixtureComponent> components);

  static VonMisesMixture single(const VonMises& dist);
  static VonMisesMixture uniform();

  [[nodiscard]] std::span<const MixtureComponent> components() const { return components_; }
  [[nodiscard]] std::size_t size() const { return components_.size(); }
  [[nodiscard]] const MixtureComponent& operator[](std::size_t m) const { return components_[m]; }

  [[nodiscard]] double log_pdf(Angle theta) const;
  [[nodiscard]] double pdf(Angle theta) const;

  friend bool operator==(const VonMisesMixture& a, const VonMisesMixture& b);

 private:
  std::vector<MixtureComponent> components_;
};

double vmm_pdf(const VonMisesMixture& mix, Angle theta);

/// Component family plugged into the generic EM loop.
struct VonMisesFamily {
  using Component = VonMises;
  using Sample = Angle;

  double log_pdf(const VonMises& dist, Angle theta) const { return vm_log_pdf(dist, theta); }
  VonMises weighted_fit(std::span<const Angle> thetas, std::span<const double> weights) const;
  /// Distance between the (cos mu, sin mu) embeddings of two means.
  double mean_shift(const VonMises& a, const VonMises& b) const;
};

/// M x N posterior membership probabilities, row m = component m.
class Responsibilities {
 public:
  Responsibilities(std::size_t components, std::size_t samples, std::vector<double> values);

  [[nodiscard]] std::size_t components() const { return rows_; }
  [[nodiscard]] std::size_t samples() const { return cols_; }
  [[nodiscard]] double operator()(std::size_t m, std::size_t n) const { return values_[m * cols_ + n]; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// E-step. Every column sums to one. Throws std::domain_error on empty data.
Responsibilities responsibilities(const VonMisesMixture& mix, std::span<const Angle> thetas);

/// M-step: weights from responsibility mass, means from the
/// responsibility-weighted resultant, concentrations as its exact inverse
/// Bessel ratio. Components with zero mass are dropped; the returned weights
/// sum to one.
std::vector<MixtureComponent> m_step(const Responsibilities& gammas, std::span<const Angle> thetas);

/// DBSCAN on the circle with metric |wrap(a - b)|. Returns a label per input
/// angle (cluster id or kNoise).
std::vector<int> dbscan_circle(std::span<const Angle> thetas, double eps, std::size_t min_pts);

/// Mean direction of each density cluster (at most config.max_components,
/// largest first when capped). Falls back to the global circular mean when
/// every point is noise.
std::vector<Angle> init_clusters(std::span<const Angle> thetas, const EmConfig& config);

struct VmmFit {
  VonMisesMixture mixture;
  EmReport report;
};

/// Mixture fit: density-clustered (or k-means++ when config.n_components is
/// set) starting means, equal weights, kappa = 1, then EM.
/// Throws std::domain_error on empty data or an invalid config.
VmmFit fit_vmm(std::span<const Angle> thetas, const EmConfig& config);

/// EM from a caller-supplied starting mixture (warm start or forced layout).
VmmFit fit_vmm_from(std::span<const Angle> thetas, const VonMisesMixture& initial,
                    const EmConfig& config);

enum class FitMode { vm, vmm };

/// Single von Mises fit wrapped as a one-component mixture (mode vm) or
/// fit_vmm (mode vmm). The vm report records zero iterations.
VmmFit fit_mixture(std::span<const Angle> thetas, FitMode mode, const EmConfig& config);

/// One draw from VM(mu, kappa) by the Best-Fisher rejection scheme.
Angle sample_vm(const VonMises& dist, std::mt19937_64& rng);

/// n i.i.d. draws; deterministic for a given seed.
std::vector<Angle> sample(const VonMisesMixture& mix, std::size_t n, std::uint64_t seed);

struct ModeSearch {
  std::vector<Angle> modes;  // ascending
  bool uniform = false;
};

/// Local maxima of the mixture density: 3600-point scan, each bracket refined
/// by golden-section search, duplicates within 1e-6 merged.
ModeSearch find_modes(const VonMisesMixture& mix);

}  // namespace dirmap
