#pragma once

namespace dirmap {

/// Upper bound on any concentration this library reports. Beyond it the
/// density is numerically a point mass.
inline constexpr double kKappaMax = 1e6;

/// Modified Bessel function of the first kind, order 0. Power series for
/// kappa <= 50, asymptotic expansion above (overflows to +inf past ~700;
/// use log_bessel_i0 there).
double bessel_i0(double kappa);

/// Modified Bessel function of the first kind, order 1.
double bessel_i1(double kappa);

/// log I_nu(x) for real order nu >= 0 and x >= 0. Evaluated in log space so
/// it stays finite for every finite x. Returns -inf for I_nu(0) with nu > 0.
double log_bessel_i(double nu, double x);

inline double log_bessel_i0(double kappa) { return log_bessel_i(0.0, kappa); }

/// A(kappa) = I1(kappa) / I0(kappa), in [0, 1) and strictly increasing.
double bessel_ratio_a(double kappa);

/// dA/dkappa = 1 - A/kappa - A^2 (1/2 at kappa = 0).
double bessel_ratio_a_derivative(double kappa);

struct KappaEstimate {
  double kappa = 0.0;
  bool saturated = false;  // clamped to kKappaMax
};

/// Closed-form approximation of A^{-1}(r_bar):
///   2r + r^3 + (5/6) r^5    for r below kSmallResultant,
///   0.5 / (1 - r)           otherwise.
/// r_bar >= 1 (or any value whose estimate exceeds kKappaMax) saturates.
KappaEstimate inverse_bessel_ratio(double r_bar);

/// Branch point of inverse_bessel_ratio: where both branches agree, so the
/// approximation is continuous and non-decreasing.
extern const double kSmallResultant;

/// Root of A(kappa) = r_bar to machine precision (Newton from the closed-form
/// estimate, safeguarded by bisection). This is the exact maximum-likelihood
/// concentration for a sample with mean resultant length r_bar.
KappaEstimate solve_bessel_ratio(double r_bar);

}  // namespace dirmap
