#include "dirmap/circular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dirmap {

void ResultantSums::add(Angle theta, double w) {
  weight += w;
  sum_cos += w * std::cos(theta.radians());
  sum_sin += w * std::sin(theta.radians());
}

void ResultantSums::add(std::span<const Angle> thetas) {
  for (Angle t : thetas) {
    add(t);
  }
}

double ResultantSums::mean_resultant_length() const {
  if (empty()) {
    return 0.0;
  }
  return std::min(1.0, std::hypot(sum_cos / weight, sum_sin / weight));
}

CircularStats circular_stats(std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("circular_stats: empty sample");
  }
  ResultantSums sums;
  sums.add(thetas);
  CircularStats out;
  out.n = thetas.size();
  out.c_bar = sums.sum_cos / sums.weight;
  out.s_bar = sums.sum_sin / sums.weight;
  out.mean_dir = Angle(std::atan2(out.s_bar, out.c_bar));
  out.r_bar = std::hypot(out.c_bar, out.s_bar);
  out.variance = 1.0 - out.r_bar;
  return out;
}

VonMises::VonMises(Angle mu, double kappa) : mu_(mu), kappa_(kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::domain_error("VonMises: kappa must be finite and non-negative");
  }
  log_norm_ = std::log(kTwoPi) + log_bessel_i0(kappa);
}

double vm_log_pdf(const VonMises& dist, Angle theta) {
  return dist.kappa() * std::cos(theta.radians() - dist.mu().radians()) - dist.log_normalizer();
}

double vm_pdf(const VonMises& dist, Angle theta) { return std::exp(vm_log_pdf(dist, theta)); }

double vm_log_likelihood(const VonMises& dist, const ResultantSums& sums) {
  if (sums.empty()) {
    throw std::domain_error("vm_log_likelihood: empty sample");
  }
  const double mu = dist.mu().radians();
  // N R cos(mean - mu) == C cos(mu) + S sin(mu)
  const double projected = sums.sum_cos * std::cos(mu) + sums.sum_sin * std::sin(mu);
  return -sums.weight * dist.log_normalizer() + dist.kappa() * projected;
}

double vm_log_likelihood(const VonMises& dist, std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("vm_log_likelihood: empty sample");
  }
  ResultantSums sums;
  sums.add(thetas);
  return vm_log_likelihood(dist, sums);
}

VonMisesFit fit_vm(const ResultantSums& sums) {
  if (sums.empty()) {
    throw std::domain_error("fit_vm: empty sample");
  }
  const double c_bar = sums.sum_cos / sums.weight;
  const double s_bar = sums.sum_sin / sums.weight;
  const double r_bar = std::hypot(c_bar, s_bar);
  if (r_bar < kUniformResultant) {
    return {VonMises(Angle(0.0), 0.0), FitStatus::uniform};
  }
  const KappaEstimate k = solve_bessel_ratio(std::min(r_bar, 1.0));
  return {VonMises(Angle(std::atan2(s_bar, c_bar)), k.kappa),
          k.saturated ? FitStatus::saturated : FitStatus::regular};
}

VonMisesFit fit_vm(std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("fit_vm: empty sample");
  }
  ResultantSums sums;
  sums.add(thetas);
  return fit_vm(sums);
}

}  // namespace dirmap
