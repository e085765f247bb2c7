#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dirmap/eval.hpp"
#include "dirmap/synth.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dirmap;

namespace {

std::vector<Angle> scene_thetas(Scene scene, double noise, std::uint64_t seed, std::size_t agents = 30) {
  SceneSpec spec;
  spec.scene = scene;
  spec.n_agents = agents;
  spec.noise_sigma = noise;
  spec.seed = seed;
  std::vector<Angle> out;
  for (const auto& o : headings_from_tracks(generate(spec).points)) {
    out.push_back(o.theta);
  }
  return out;
}

VonMisesMixture two(double a1, double mu1, double k1, double mu2, double k2) {
  return VonMisesMixture({{a1, VonMises(Angle(mu1), k1)}, {1.0 - a1, VonMises(Angle(mu2), k2)}});
}

}  // namespace

TEST_CASE("enll") {
  const auto data = sample(two(0.4, 1, 3, -1, 8), 300, 1);
  CHECK(enll(VonMisesMixture::uniform(), data) == doctest::Approx(std::log(2 * kPi)).epsilon(1e-14));
  CHECK(std::log(2 * kPi) == doctest::Approx(1.83788).epsilon(1e-5));

  const std::vector<Angle> at_mu(10, Angle(0.3));
  const double expected = -std::log(oracle::vm_density(0.3, 0.3, 2.0));
  CHECK(expected == doctest::Approx(0.66184).epsilon(1e-4));
  CHECK(enll(VonMisesMixture::single(VonMises(Angle(0.3), 2.0)), at_mu) == doctest::Approx(expected).epsilon(1e-13));

  const VonMises vm(Angle(0.8), 4.0);
  CHECK(enll(VonMisesMixture::single(vm), data) ==
        doctest::Approx(-vm_log_likelihood(vm, data) / static_cast<double>(data.size())).epsilon(1e-12));
  CHECK_THROWS_AS(enll(VonMisesMixture::uniform(), std::vector<Angle>{}), std::domain_error);
}

TEST_CASE("folds") {
  const auto folds = make_folds(103, 10, 4);
  REQUIRE(folds.size() == 10);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    CHECK((f.size() == 10 || f.size() == 11));
    seen.insert(f.begin(), f.end());
  }
  CHECK(seen.size() == 103);
  CHECK(make_folds(103, 10, 4) == folds);
  CHECK(make_folds(103, 10, 5) != folds);
  CHECK_THROWS_AS(make_folds(9, 10, 1), std::domain_error);
  CHECK_THROWS_AS(make_folds(9, 1, 1), std::domain_error);
}

TEST_CASE("apd_cv") {
  const auto uniform_data = sample(VonMisesMixture::uniform(), 500, 2);
  const Fitter uniform_fit = [](std::span<const Angle>) { return VonMisesMixture::uniform(); };
  CHECK(apd_cv(uniform_data, uniform_fit, 10, 3) == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-14));

  const auto tight = sample(VonMisesMixture::single(VonMises(Angle(1.0), 50.0)), 500, 3);
  CHECK(apd_cv(tight, FitMode::vm, 10, EmConfig{}, 1) > 5.0 / (2 * kPi));

  const auto bimodal = sample(two(0.5, 0.0, 10, kPi, 10), 1000, 4);
  CHECK(apd_cv(bimodal, FitMode::vmm, 10, EmConfig{}, 1) > apd_cv(bimodal, FitMode::vm, 10, EmConfig{}, 1));
  CHECK_THROWS_AS(apd_cv(std::vector<Angle>(5, Angle(0.0)), FitMode::vm, 10, EmConfig{}, 1), std::domain_error);
}

TEST_CASE("apd_cv is rotation invariant") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = sample(fixture::random_mixture(rng, 3, 15.0), 400, 60 + static_cast<std::uint64_t>(trial));
    const double delta = ang(rng);
    for (FitMode mode : {FitMode::vm, FitMode::vmm}) {
      CHECK(std::abs(apd_cv(data, mode, 10, EmConfig{}, 7) - apd_cv(fixture::shifted(data, delta), mode, 10, EmConfig{}, 7)) <
            1e-3);
    }
  }
}

TEST_CASE("mse_closest_mode") {
  const auto mix = two(0.5, 0.0, 5, kPi, 5);
  const double v = mse_closest_mode(mix, std::vector<Angle>{Angle(kPi / 2)});
  CHECK(v == doctest::Approx(kPi * kPi / 4).epsilon(1e-8));
  CHECK(v == doctest::Approx(2.4674).epsilon(1e-4));

  const auto skew = two(0.7, 0.0, 2, 2.5, 2);
  const auto modes = find_modes(skew).modes;
  CHECK(mse_closest_mode(skew, modes) == 0.0);

  const VonMises vm(Angle(1.0), 3.0);
  const std::vector<Angle> pts{Angle(1.2), Angle(0.5)};
  CHECK(mse_closest_mode(VonMisesMixture::single(vm), pts) == doctest::Approx((0.04 + 0.25) / 2).epsilon(1e-8));

  CHECK_THROWS_AS(mse_closest_mode(VonMisesMixture::uniform(), pts), std::domain_error);

  const auto bimodal = sample(two(0.5, 0.0, 10, kPi, 10), 800, 9);
  CHECK(mse_closest_mode(fit_vmm(bimodal, EmConfig{}).mixture, bimodal) <
        mse_closest_mode(VonMisesMixture::single(fit_vm(bimodal).dist), bimodal));
}

TEST_CASE("kl_divergence") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = fixture::random_mixture(rng, 4, 20.0);
    const auto q = fixture::random_mixture(rng, 4, 20.0);
    CHECK(std::abs(kl_divergence(p, p)) < 1e-9);
    CHECK(kl_divergence(p, q) >= -1e-6);
  }
  const double kappa = 2.0;
  const double i0 = static_cast<double>(oracle::series_i0(kappa, 60));
  const double i1 = static_cast<double>(oracle::series_i1(kappa, 60));
  const double closed = kappa * i1 / i0 - std::log(i0);
  CHECK(closed == doctest::Approx(0.57164).epsilon(1e-4));
  CHECK(kl_divergence(VonMisesMixture::single(VonMises(Angle(0.0), kappa)), VonMisesMixture::uniform()) ==
        doctest::Approx(closed).epsilon(1e-10));

  const auto a = VonMisesMixture::single(VonMises(Angle(0.0), 8.0));
  const auto b = two(0.5, 0.0, 1.0, 2.0, 3.0);
  CHECK(std::abs(kl_divergence(a, b) - kl_divergence(b, a)) > 1e-3);
}

TEST_CASE("fitted models beat the uniform model in-sample") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = sample(fixture::random_mixture(rng, 3, 10.0), 30 + 20 * static_cast<std::size_t>(trial),
                             static_cast<std::uint64_t>(trial));
    const double uniform = enll(VonMisesMixture::uniform(), data);
    CHECK(enll(VonMisesMixture::single(fit_vm(data).dist), data) <= uniform + 1e-12);
    CHECK(enll(fit_vmm(data, EmConfig{}).mixture, data) <= uniform + 1e-12);
  }
}

TEST_CASE("compare on synthetic scenes") {
  const auto uni = compare(scene_thetas(Scene::unimodal, 0.15, 1), EmConfig{}, 1);
  CHECK(uni.vm.method == FitMode::vm);
  CHECK(uni.vmm.method == FitMode::vmm);
  CHECK(method_name(uni.vm.method) == "DGM-VM");
  CHECK(uni.vm.fit_ms.size() == 10);

  // Per-cell comparison as in the grid-map setting.
  for (Scene scene : {Scene::unimodal, Scene::multimodal}) {
    SceneSpec spec;
    spec.scene = scene;
    spec.n_agents = 30;
    spec.noise_sigma = 0.15;
    spec.seed = 2;
    const ObservationStore store(scene_grid(), headings_from_tracks(generate(spec).points));
    const auto cells = compare_cells(store, EmConfig{}, 3);
    CHECK(cells.cells_evaluated > 0);
    const auto& vm = cells.totals.vm;
    const auto& vmm = cells.totals.vmm;
    if (scene == Scene::unimodal) {
      CHECK(std::abs(vmm.mse_closest_mode - vm.mse_closest_mode) / vm.mse_closest_mode < 0.1);
    } else {
      CHECK(vmm.mse_closest_mode < vm.mse_closest_mode);
      CHECK(vmm.enll < vm.enll);
      CHECK(vmm.apd > vm.apd);
    }
    const auto again = compare_cells(store, EmConfig{}, 3);
    CHECK(again.totals.vm.enll == vm.enll);
    CHECK(again.totals.vmm.apd == vmm.apd);
    CHECK(again.totals.vmm.mse_closest_mode == vmm.mse_closest_mode);
  }

  CHECK_THROWS_AS(compare(std::vector<Angle>(9, Angle(0.0)), EmConfig{}, 1), std::domain_error);
}
