// Shared fixtures for the test suites.
#pragma once

#include <random>
#include <vector>

#include "dirmap/vmm.hpp"

namespace fixture {

inline dirmap::VonMisesMixture random_mixture(std::mt19937_64& rng, std::size_t max_m, double max_kappa) {
  using namespace dirmap;
  std::uniform_int_distribution<std::size_t> count(1, max_m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t m = count(rng);
  std::vector<double> w(m);
  double total = 0.0;
  for (double& x : w) {
    x = 0.1 + unit(rng);
    total += x;
  }
  std::vector<MixtureComponent> comps;
  for (std::size_t i = 0; i < m; ++i) {
    comps.push_back({w[i] / total, VonMises(Angle(kPi * (2 * unit(rng) - 1)), max_kappa * unit(rng))});
  }
  em::renormalize(comps);
  return VonMisesMixture(std::move(comps));
}

inline std::vector<dirmap::Angle> shifted(const std::vector<dirmap::Angle>& xs, double delta) {
  std::vector<dirmap::Angle> out;
  for (dirmap::Angle t : xs) {
    out.emplace_back(t.radians() + delta);
  }
  return out;
}

inline std::vector<dirmap::MixtureComponent> shifted_components(const dirmap::VonMisesMixture& mix, double delta) {
  std::vector<dirmap::MixtureComponent> out;
  for (const auto& c : mix.components()) {
    out.push_back({c.alpha, dirmap::VonMises(dirmap::Angle(c.dist.mu().radians() + delta), c.dist.kappa())});
  }
  return out;
}

}  // namespace fixture
