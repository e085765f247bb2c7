#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dirmap/em.hpp"

namespace dirmap {

/// Point on the unit sphere in D >= 2 dimensions.
class UnitVector {
 public:
  /// Throws std::domain_error unless D >= 2 and the norm is 1 within 1e-12.
  explicit UnitVector(std::vector<double> components);
  /// Scales a non-zero finite vector onto the sphere.
  static UnitVector normalized(std::vector<double> components);

  [[nodiscard]] std::size_t dim() const { return v_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return v_[i]; }
  [[nodiscard]] std::span<const double> components() const { return v_; }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  std::vector<double> v_;
};

double dot(const UnitVector& a, const UnitVector& b);

class VonMisesFisher {
 public:
  /// Throws std::domain_error for a negative, non-finite or oversized kappa.
  VonMisesFisher(UnitVector mu, double kappa);

  [[nodiscard]] const UnitVector& mu() const { return mu_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] std::size_t dim() const { return mu_.dim(); }
  /// log C_D(kappa); at kappa = 0 the uniform value log(Gamma(D/2) / (2 pi^(D/2))).
  [[nodiscard]] double log_normalizer() const { return log_c_; }

  friend bool operator==(const VonMisesFisher& a, const VonMisesFisher& b) {
    return a.mu_ == b.mu_ && a.kappa_ == b.kappa_;
  }

 private:
  UnitVector mu_;
  double kappa_;
  double log_c_;
};

/// Throws std::domain_error on a dimension mismatch.
double vmf_log_pdf(const VonMisesFisher& dist, const UnitVector& x);
double vmf_pdf(const VonMisesFisher& dist, const UnitVector& x);

struct VmfFit {
  VonMisesFisher dist;
  bool uniform = false;    // zero resultant: kappa = 0, mu arbitrary (first axis)
  bool saturated = false;  // kappa clamped at kKappaMax
};

/// Mean direction and kappa ~ R(D - R^2) / (1 - R^2). Throws
/// std::domain_error on empty input or mixed dimensions.
VmfFit fit_vmf(std::span<const UnitVector> xs);
VmfFit fit_vmf(std::span<const UnitVector> xs, std::span<const double> weights);

/// Wood's rejection sampler; deterministic for a given seed.
std::vector<UnitVector> sample_vmf(const VonMisesFisher& dist, std::size_t n, std::uint64_t seed);

struct VmfFamily {
  using Component = VonMisesFisher;
  using Sample = UnitVector;

  double log_pdf(const VonMisesFisher& dist, const UnitVector& x) const { return vmf_log_pdf(dist, x); }
  VonMisesFisher weighted_fit(std::span<const UnitVector> xs, std::span<const double> weights) const {
    return fit_vmf(xs, weights).dist;
  }
  double mean_shift(const VonMisesFisher& a, const VonMisesFisher& b) const;
};

using VmfComponent = Weighted<VonMisesFisher>;

struct VmfMixtureFit {
  std::vector<VmfComponent> components;
  EmReport report;
};

double vmf_mixture_pdf(std::span<const VmfComponent> mix, const UnitVector& x);

/// DBSCAN on the sphere (great-circle distance, config.dbscan_eps) seeds the
/// means, then EM as for circular mixtures.
VmfMixtureFit fit_vmf_mixture(std::span<const UnitVector> xs, const EmConfig& config);

}  // namespace dirmap
