#pragma once

#include <cstddef>
#include <span>

#include "dirmap/angle.hpp"
#include "dirmap/bessel.hpp"

namespace dirmap {

/// Running (optionally weighted) sums of unit vectors: the sufficient
/// statistics of a von Mises sample. Accumulation is strictly sequential so
/// feeding the same angles in the same order always gives identical bits.
struct ResultantSums {
  double weight = 0.0;
  double sum_cos = 0.0;
  double sum_sin = 0.0;

  void add(Angle theta, double w = 1.0);
  void add(std::span<const Angle> thetas);

  [[nodiscard]] bool empty() const { return weight <= 0.0; }
  /// |sum of unit vectors| / total weight, in [0, 1].
  [[nodiscard]] double mean_resultant_length() const;
};

struct CircularStats {
  std::size_t n = 0;
  double c_bar = 0.0;
  double s_bar = 0.0;
  Angle mean_dir;
  double r_bar = 0.0;
  double variance = 1.0;
};

/// Mean directional components, mean direction, mean resultant length and
/// circular variance. Throws std::domain_error on an empty sample.
CircularStats circular_stats(std::span<const Angle> thetas);

/// Unimodal von Mises distribution VM(mu, kappa).
class VonMises {
 public:
  VonMises() = default;
  /// Throws std::domain_error unless kappa is finite and >= 0.
  VonMises(Angle mu, double kappa);

  [[nodiscard]] Angle mu() const { return mu_; }
  [[nodiscard]] double kappa() const { return kappa_; }
  /// log(2 pi I0(kappa)).
  [[nodiscard]] double log_normalizer() const { return log_norm_; }

  friend bool operator==(const VonMises& a, const VonMises& b) {
    return a.mu_ == b.mu_ && a.kappa_ == b.kappa_;
  }

 private:
  Angle mu_;
  double kappa_ = 0.0;
  double log_norm_ = 0.0;
};

double vm_log_pdf(const VonMises& dist, Angle theta);
double vm_pdf(const VonMises& dist, Angle theta);

/// Log-likelihood of an i.i.d. sample, evaluated through its sufficient
/// statistics: -N log 2pi - N log I0(kappa) + kappa N R cos(mean - mu).
double vm_log_likelihood(const VonMises& dist, std::span<const Angle> thetas);
double vm_log_likelihood(const VonMises& dist, const ResultantSums& sums);

enum class FitStatus {
  regular,
  saturated,  // every observation identical (up to rounding); kappa clamped
  uniform,    // zero resultant; mu undefined and reported as 0
};

struct VonMisesFit {
  VonMises dist;
  FitStatus status = FitStatus::regular;
};

/// Resultant lengths below this are treated as exactly balanced data.
inline constexpr double kUniformResultant = 1e-12;

/// Maximum-likelihood fit: mu is the sample mean direction and kappa the
/// root of A(kappa) = R. Throws std::domain_error on an empty sample.
VonMisesFit fit_vm(std::span<const Angle> thetas);
VonMisesFit fit_vm(const ResultantSums& sums);

}  // namespace dirmap
