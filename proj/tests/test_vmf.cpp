#include <doctest.h>

#include <cmath>
#include <random>

#include "dirmap/bessel.hpp"
#include "dirmap/circular.hpp"
#include "dirmap/vmf.hpp"
#include "oracles.hpp"

using namespace dirmap;

namespace {

UnitVector e(std::size_t dim, std::size_t axis) {
  std::vector<double> v(dim, 0.0);
  v[axis] = 1.0;
  return UnitVector(std::move(v));
}

UnitVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) {
    x = n(rng);
  }
  return UnitVector::normalized(std::move(v));
}

UnitVector polar(double theta) { return UnitVector::normalized({std::cos(theta), std::sin(theta)}); }

// Rotation in the plane of the first two axes.
UnitVector rotate(const UnitVector& x, double a) {
  std::vector<double> v(x.components().begin(), x.components().end());
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double v0 = c * v[0] - s * v[1];
  const double v1 = s * v[0] + c * v[1];
  v[0] = v0;
  v[1] = v1;
  return UnitVector::normalized(std::move(v));
}

// Closed-form D = 3 density.
double s2_density(double kappa, double cos_angle) {
  return kappa * std::exp(kappa * cos_angle) / (4.0 * oracle::kPi * std::sinh(kappa));
}

}  // namespace

TEST_CASE("unit vector validation") {
  CHECK_THROWS_AS(UnitVector({1.0}), std::domain_error);
  CHECK_THROWS_AS(UnitVector({1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(UnitVector::normalized({0.0, 0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(UnitVector::normalized({NAN, 1.0}), std::domain_error);
  const auto u = UnitVector::normalized({3.0, 4.0});
  CHECK(u[0] == doctest::Approx(0.6));
  CHECK(u[1] == doctest::Approx(0.8));
  CHECK_THROWS_AS(dot(e(2, 0), e(3, 0)), std::domain_error);
  CHECK_THROWS_AS(VonMisesFisher(e(3, 0), -1.0), std::domain_error);
  CHECK_THROWS_AS(VonMisesFisher(e(3, 0), INFINITY), std::domain_error);
  CHECK_THROWS_AS(vmf_pdf(VonMisesFisher(e(3, 0), 1.0), e(2, 0)), std::domain_error);
}

TEST_CASE("sphere densities in closed form") {
  const double uniform = 1.0 / (4.0 * oracle::kPi);
  CHECK(uniform == doctest::Approx(0.0795775).epsilon(1e-6));
  CHECK(vmf_pdf(VonMisesFisher(e(3, 2), 0.0), e(3, 0)) == doctest::Approx(uniform).epsilon(1e-14));
  CHECK(vmf_pdf(VonMisesFisher(e(3, 2), 1e-10), e(3, 0)) == doctest::Approx(uniform).epsilon(1e-9));

  const double at_mode = 2.0 * std::exp(2.0) / (4.0 * oracle::kPi * std::sinh(2.0));
  CHECK(at_mode == doctest::Approx(0.3242487084).epsilon(1e-9));
  CHECK(std::abs(at_mode - 0.32404) < 1e-3);
  CHECK(vmf_pdf(VonMisesFisher(e(3, 2), 2.0), e(3, 2)) == doctest::Approx(at_mode).epsilon(1e-13));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> k(0.01, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_unit(rng, 3);
    const auto x = random_unit(rng, 3);
    const double kappa = k(rng);
    CHECK(vmf_pdf(VonMisesFisher(mu, kappa), x) == doctest::Approx(s2_density(kappa, dot(mu, x))).epsilon(1e-11));
  }

  // D = 4 uniform: 1 / (2 pi^2).
  CHECK(vmf_pdf(VonMisesFisher(e(4, 0), 0.0), e(4, 1)) ==
        doctest::Approx(1.0 / (2.0 * oracle::kPi * oracle::kPi)).epsilon(1e-14));
}

TEST_CASE("circle case agrees with von Mises") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-oracle::kPi, oracle::kPi);
  std::uniform_real_distribution<double> k(0.0, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double mu = ang(rng);
    const double theta = ang(rng);
    const double kappa = k(rng);
    const double expected = vm_pdf(VonMises(Angle(mu), kappa), Angle(theta));
    CHECK(vmf_pdf(VonMisesFisher(polar(mu), kappa), polar(theta)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("monte carlo normalization") {
  std::mt19937_64 rng(3);
  for (std::size_t dim : {3u, 4u}) {
    for (double kappa : {0.5, 4.0}) {
      const VonMisesFisher dist(random_unit(rng, dim), kappa);
      const double area = dim == 3 ? 4.0 * oracle::kPi : 2.0 * oracle::kPi * oracle::kPi;
      double sum = 0.0;
      const int n = 1'000'000;
      for (int i = 0; i < n; ++i) {
        sum += vmf_pdf(dist, random_unit(rng, dim));
      }
      CHECK(std::abs(area * sum / n - 1.0) < 0.01);
    }
  }
}

TEST_CASE("fit edge cases") {
  const std::vector<UnitVector> same(5, e(3, 1));
  const auto sat = fit_vmf(same);
  CHECK(sat.saturated);
  CHECK(sat.dist.kappa() == kKappaMax);
  CHECK(sat.dist.mu() == e(3, 1));

  const std::vector<UnitVector> opposite{e(3, 0), UnitVector({-1.0, 0.0, 0.0})};
  const auto uni = fit_vmf(opposite);
  CHECK(uni.uniform);
  CHECK(uni.dist.kappa() == 0.0);

  CHECK_THROWS_AS(fit_vmf(std::vector<UnitVector>{}), std::domain_error);
  CHECK_THROWS_AS(fit_vmf(std::vector<UnitVector>{e(3, 0), e(2, 0)}), std::domain_error);
}

TEST_CASE("fit recovers a known distribution") {
  const auto xs = sample_vmf(VonMisesFisher(e(3, 2), 5.0), 10'000, 4);
  const auto fit = fit_vmf(xs);
  CHECK(dot(fit.dist.mu(), e(3, 2)) > 0.999);
  CHECK(std::abs(fit.dist.kappa() - 5.0) < 0.5);
}

TEST_CASE("circle fit stays near the exact estimator") {
  double worst = 0.0;
  for (int i = 1; i <= 900; ++i) {
    const double r = i / 1000.0;
    const double approx = r * (2.0 - r * r) / (1.0 - r * r);
    const double exact = oracle::inverse_ratio_bisection(r);
    worst = std::max(worst, std::abs(approx - exact) / exact);
  }
  CHECK(worst < 0.07);

  // Weighted and unweighted fits agree through the public interface.
  const std::vector<UnitVector> xs{polar(0.1), polar(0.4), polar(-0.2)};
  const std::vector<double> ones(3, 1.0);
  CHECK(fit_vmf(xs).dist == fit_vmf(xs, ones).dist);
}

TEST_CASE("sampler") {
  const auto flat = sample_vmf(VonMisesFisher(e(3, 0), 0.0), 20'000, 5);
  std::vector<double> sum(3, 0.0);
  for (const auto& x : flat) {
    for (std::size_t k = 0; k < 3; ++k) {
      sum[k] += x[k];
    }
  }
  const double r = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]) / 20'000.0;
  CHECK(r < 0.02);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const auto mu = random_unit(rng, 3);
    for (const auto& x : sample_vmf(VonMisesFisher(mu, 1e4), 500, 7)) {
      CHECK(dot(mu, x) > 0.99);
    }
    // Mean cosine to the mode is coth(kappa) - 1/kappa on the sphere.
    const double kappa = 3.0;
    const auto xs = sample_vmf(VonMisesFisher(mu, kappa), 50'000, 8 + static_cast<std::uint64_t>(trial));
    double mean = 0.0;
    for (const auto& x : xs) {
      mean += dot(mu, x);
    }
    mean /= static_cast<double>(xs.size());
    CHECK(std::abs(mean - (1.0 / std::tanh(kappa) - 1.0 / kappa)) < 0.01);
  }

  const VonMisesFisher d(e(4, 3), 2.0);
  CHECK(sample_vmf(d, 100, 9) == sample_vmf(d, 100, 9));
  CHECK(sample_vmf(d, 100, 9) != sample_vmf(d, 100, 10));
  CHECK_THROWS_AS(sample_vmf(d, 0, 1), std::domain_error);
}

TEST_CASE("rotation equivariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-oracle::kPi, oracle::kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto mu = random_unit(rng, 3);
    const auto x = random_unit(rng, 3);
    const double a = ang(rng);
    const VonMisesFisher dist(mu, 7.0);
    const VonMisesFisher turned(rotate(mu, a), 7.0);
    CHECK(std::abs(vmf_log_pdf(dist, x) - vmf_log_pdf(turned, rotate(x, a))) < 1e-9);
  }
}

TEST_CASE("mixture fit separates antipodal clusters") {
  auto xs = sample_vmf(VonMisesFisher(e(3, 2), 20.0), 600, 12);
  const auto other = sample_vmf(VonMisesFisher(UnitVector({0.0, 0.0, -1.0}), 20.0), 400, 13);
  xs.insert(xs.end(), other.begin(), other.end());
  const auto fit = fit_vmf_mixture(xs, EmConfig{});
  REQUIRE(fit.components.size() == 2);
  CHECK(fit.report.converged);
  double total = 0.0;
  for (const auto& c : fit.components) {
    total += c.alpha;
    CHECK(std::abs(dot(c.dist.mu(), e(3, 2))) > 0.99);
    CHECK(std::abs(c.dist.kappa() - 20.0) < 4.0);
    const double expected = dot(c.dist.mu(), e(3, 2)) > 0 ? 0.6 : 0.4;
    CHECK(std::abs(c.alpha - expected) < 0.02);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vmf_mixture_pdf(fit.components, e(3, 2)) > vmf_mixture_pdf(fit.components, e(3, 0)));
  const auto trace = fit.report.nll_trace;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] <= trace[i - 1] + 1e-9 * static_cast<double>(xs.size()));
  }
}
