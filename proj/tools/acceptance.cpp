// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dirmap/cli.hpp"
#include "dirmap/eval.hpp"
#include "dirmap/grid_map.hpp"
#include "dirmap/synth.hpp"
#include "dirmap/vmf.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dirmap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double circ_dist(double a, double b) { return std::abs(oracle::circ_diff(a, b)); }

std::vector<Observation> scene_obs(Scene scene, std::size_t agents, double noise, std::uint64_t seed) {
  SceneSpec spec;
  spec.scene = scene;
  spec.n_agents = agents;
  spec.noise_sigma = noise;
  spec.seed = seed;
  return headings_from_tracks(generate(spec).points);
}

// 1. EM monotonicity and convergence on the multimodal scene.
Outcome em_convergence() {
  const auto start = Clock::now();
  const auto obs = scene_obs(Scene::multimodal, 40, 0.15, 1);
  const auto map = build(obs, scene_grid(), FitMode::vmm, EmConfig{});
  std::size_t cells = 0;
  std::size_t fast = 0;
  std::size_t worst_iter = 0;
  double worst_rise = -1e300;
  for (const auto& c : map.cells()) {
    if (!c.observed()) {
      continue;
    }
    ++cells;
    const auto& r = *c.report;
    worst_iter = std::max(worst_iter, r.iterations);
    if (r.converged && r.iterations <= 30) {
      ++fast;
    }
    for (std::size_t i = 1; i < r.nll_trace.size(); ++i) {
      worst_rise = std::max(worst_rise, r.nll_trace[i] - r.nll_trace[i - 1]);
    }
  }
  const double secs = seconds_since(start);
  const bool monotone = worst_rise <= 1e-9;
  const bool converge = cells > 0 && 10 * fast >= 9 * cells;
  return {monotone && converge && secs < 10.0,
          fmt::format("{} cells, {} converged within 30 iterations (max {}), largest NLL rise {:.3g}, {:.2f} s", cells,
                      fast, worst_iter, worst_rise, secs)};
}

// 2. In-sample closest-mode MSE, grid-map setting.
Outcome mse_ordering() {
  const auto start = Clock::now();
  const auto run = [](Scene scene) {
    const ObservationStore store(scene_grid(), scene_obs(scene, 40, 0.15, 1));
    return compare_cells(store, EmConfig{}, 1).totals;
  };
  const auto uni = run(Scene::unimodal);
  const auto multi = run(Scene::multimodal);
  const double uni_rel = std::abs(uni.vmm.mse_closest_mode - uni.vm.mse_closest_mode) / uni.vm.mse_closest_mode;
  const double multi_ratio = multi.vmm.mse_closest_mode / multi.vm.mse_closest_mode;
  const double secs = seconds_since(start);
  return {uni_rel < 0.15 && multi_ratio < 0.6 && secs < 30.0,
          fmt::format("unimodal VM {:.4f} VMM {:.4f} (rel diff {:.3f}); multimodal VM {:.4f} VMM {:.4f} (ratio "
                      "{:.3f}); {:.2f} s",
                      uni.vm.mse_closest_mode, uni.vmm.mse_closest_mode, uni_rel, multi.vm.mse_closest_mode,
                      multi.vmm.mse_closest_mode, multi_ratio, secs)};
}

// 3. Held-out ENLL and APD under 10-fold CV over 10 seeds.
Outcome enll_apd_ordering() {
  const auto start = Clock::now();
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ObservationStore store(scene_grid(), scene_obs(Scene::multimodal, 40, 0.15, seed));
    const auto t = compare_cells(store, EmConfig{}, seed, 10).totals;
    const bool win = t.vmm.enll < t.vm.enll && t.vmm.apd > t.vm.apd;
    wins += win ? 1 : 0;
    per_seed += win ? '+' : '-';
  }
  const double secs = seconds_since(start);
  return {wins >= 9 && secs < 60.0, fmt::format("{}/10 seeds [{}], {:.2f} s", wins, per_seed, secs)};
}

// Log-likelihood through std::cyl_bessel_i, independent of the library.
double oracle_loglik(std::span<const Angle> xs, double mu, double kappa) {
  double s = 0.0;
  for (Angle t : xs) {
    s += std::cos(t.radians() - mu);
  }
  return kappa * s - static_cast<double>(xs.size()) * std::log(2.0 * oracle::kPi * std::cyl_bessel_i(0.0, kappa));
}

// 4. fit_vm against a dense (mu, kappa) grid.
Outcome mle_oracle() {
  std::mt19937_64 rng(404);
  double worst_gap = -1e300;
  double worst_grad = 0.0;
  int failures = 0;
  for (int d = 0; d < 50; ++d) {
    const auto mix = fixture::random_mixture(rng, 3, 20.0);
    const auto xs = sample(mix, 20 + 10 * static_cast<std::size_t>(d), rng());
    const auto fit = fit_vm(xs).dist;
    const double at_fit = oracle_loglik(xs, fit.mu().radians(), fit.kappa());
    double c = 0.0;
    double s = 0.0;
    for (Angle t : xs) {
      c += std::cos(t.radians());
      s += std::sin(t.radians());
    }
    std::vector<double> log_norm(201);
    for (int j = 1; j <= 200; ++j) {
      log_norm[static_cast<std::size_t>(j)] =
          static_cast<double>(xs.size()) * std::log(2.0 * oracle::kPi * std::cyl_bessel_i(0.0, 0.25 * j));
    }
    double best = -1e300;
    for (int i = 0; i < 360; ++i) {
      const double mu = -oracle::kPi + 2.0 * oracle::kPi * i / 360.0;
      const double proj = c * std::cos(mu) + s * std::sin(mu);
      for (int j = 1; j <= 200; ++j) {
        best = std::max(best, 0.25 * j * proj - log_norm[static_cast<std::size_t>(j)]);
      }
    }
    const double h = 1e-5;
    const double grad = (oracle_loglik(xs, fit.mu().radians() + h, fit.kappa()) -
                         oracle_loglik(xs, fit.mu().radians() - h, fit.kappa())) /
                        (2 * h);
    worst_gap = std::max(worst_gap, best - at_fit);
    worst_grad = std::max(worst_grad, std::abs(grad));
    if (at_fit < best - 1e-6 || std::abs(grad) >= 1e-4) {
      ++failures;
    }
  }
  return {failures == 0, fmt::format("50 datasets, {} failures; max (grid best - fit) {:.3g}, max |dL/dmu| {:.3g}",
                                     failures, worst_gap, worst_grad)};
}

// 5. Densities integrate to one.
Outcome normalization() {
  double worst_vm = 0.0;
  for (double kappa : {0.0, 0.5, 2.0, 10.0}) {
    const VonMises vm(Angle(0.7), kappa);
    worst_vm = std::max(worst_vm, std::abs(oracle::trapezoid([&](double t) { return vm_pdf(vm, Angle(t)); }, 10000) - 1));
  }
  std::mt19937_64 rng(505);
  double worst_vmm = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto mix = fixture::random_mixture(rng, 5, 30.0);
    worst_vmm = std::max(worst_vmm, std::abs(oracle::trapezoid([&](double t) { return vmm_pdf(mix, Angle(t)); }, 10000) - 1));
  }
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_vmf = 0.0;
  for (double kappa : {0.0, 1.0, 5.0}) {
    const VonMisesFisher dist(UnitVector::normalized({1.0, 2.0, 2.0}), kappa);
    double sum = 0.0;
    const int draws = 1'000'000;
    for (int i = 0; i < draws; ++i) {
      sum += vmf_pdf(dist, UnitVector::normalized({n(rng), n(rng), n(rng)}));
    }
    worst_vmf = std::max(worst_vmf, std::abs(4.0 * oracle::kPi * sum / draws - 1.0));
  }
  return {worst_vm <= 1e-6 && worst_vmm <= 1e-6 && worst_vmf <= 0.01,
          fmt::format("max |integral - 1|: vm {:.2g}, vmm {:.2g}, vMF (Monte Carlo) {:.2g}", worst_vm, worst_vmm,
                      worst_vmf)};
}

// 6. Sampling then fitting recovers the parameters.
Outcome round_trip() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ang(-oracle::kPi, oracle::kPi);
  double worst_mu = 0.0;
  double worst_kappa = 0.0;
  bool ok = true;
  for (double kappa : {2.0, 5.0, 10.0}) {
    const double mu = ang(rng);
    const auto xs = sample(VonMisesMixture::single(VonMises(Angle(mu), kappa)), 10000, rng());
    const auto fit = fit_vm(xs).dist;
    const double dmu = circ_dist(fit.mu().radians(), mu);
    const double dk = std::abs(fit.kappa() - kappa) / kappa;
    worst_mu = std::max(worst_mu, dmu);
    worst_kappa = std::max(worst_kappa, dk);
    ok = ok && dmu < 0.05 && dk < 0.1;

    const double mu2 = mu + oracle::kPi;
    const VonMisesMixture truth({{0.5, VonMises(Angle(mu), kappa)}, {0.5, VonMises(Angle(mu2), kappa)}});
    EmConfig config;
    config.n_components = 2;
    config.seed = 6;
    const auto mix = fit_vmm(sample(truth, 10000, rng()), config).mixture;
    if (mix.size() != 2) {
      ok = false;
      continue;
    }
    for (const auto& target : truth.components()) {
      // Match each true component to the fitted component with the closest mean.
      const auto& c = *std::min_element(mix.components().begin(), mix.components().end(), [&](const auto& a, const auto& b) {
        return circ_dist(a.dist.mu().radians(), target.dist.mu().radians()) <
               circ_dist(b.dist.mu().radians(), target.dist.mu().radians());
      });
      const double cm = circ_dist(c.dist.mu().radians(), target.dist.mu().radians());
      const double ck = std::abs(c.dist.kappa() - kappa) / kappa;
      worst_mu = std::max(worst_mu, cm);
      worst_kappa = std::max(worst_kappa, ck);
      ok = ok && cm < 0.05 && ck < 0.1;
    }
  }
  return {ok, fmt::format("kappa in {{2,5,10}}, VM and 2-component VMM: max mu error {:.4f} rad, max kappa error {:.2f}%",
                          worst_mu, 100 * worst_kappa)};
}

// 7. Noise-free multimodal scene: two modes on the crosswalk, one on the road.
Outcome mode_recovery() {
  SceneSpec spec;
  spec.scene = Scene::multimodal;
  spec.n_agents = 40;
  spec.noise_sigma = 0.0;
  spec.seed = 1;
  const auto scene = generate(spec);
  const GridSpec grid = scene_grid();
  const auto map = build(headings_from_tracks(scene.points), grid, FitMode::vmm, EmConfig{});
  std::size_t crosswalk = 0;
  std::size_t road = 0;
  std::size_t bad = 0;
  for (const auto& c : map.cells()) {
    if (!c.observed()) {
      continue;
    }
    const double cx = grid.x_min + (static_cast<double>(c.index.col) + 0.5) * grid.cell_width();
    const double cy = grid.y_min + (static_cast<double>(c.index.row) + 0.5) * grid.cell_height();
    const std::string region = region_of(Scene::multimodal, cx, cy);
    const auto modes = find_modes(*c.mixture).modes;
    if (region == "crosswalk") {
      ++crosswalk;
      bool good = modes.size() == 2;
      for (double truth : {oracle::kPi / 2, -oracle::kPi / 2}) {
        good = good && std::any_of(modes.begin(), modes.end(),
                                   [&](Angle m) { return circ_dist(m.radians(), truth) <= 1e-3; });
      }
      bad += good ? 0 : 1;
    } else if (region == "roadside") {
      ++road;
      bad += modes.size() == 1 ? 0 : 1;
    }
  }
  return {bad == 0 && crosswalk == 2 && road > 0,
          fmt::format("{} crosswalk cells, {} roadside cells, {} wrong", crosswalk, road, bad)};
}

// 8. Chunked online VM updates match the batch build.
Outcome online_equivalence() {
  const auto obs = scene_obs(Scene::multimodal, 40, 0.15, 8);
  const GridSpec grid = scene_grid();
  DirectionalGridMap online(grid, FitMode::vm);
  const bool uniform_start =
      online.observed_count() == 0 && query(online, 5.0, 4.0, Angle(0.3)).density == 1.0 / (2.0 * oracle::kPi);
  const std::size_t chunk = (obs.size() + 3) / 4;
  for (std::size_t begin = 0; begin < obs.size(); begin += chunk) {
    const std::size_t end = std::min(obs.size(), begin + chunk);
    online = update_online(online, std::span<const Observation>(obs).subspan(begin, end - begin), EmConfig{});
  }
  const auto batch = build(obs, grid, FitMode::vm, EmConfig{});
  double worst = 0.0;
  bool same_cells = true;
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const auto& a = online.cells()[i];
    const auto& b = batch.cells()[i];
    if (a.n_obs != b.n_obs || a.mixture.has_value() != b.mixture.has_value()) {
      same_cells = false;
      continue;
    }
    if (!a.mixture) {
      continue;
    }
    const auto& va = (*a.mixture)[0].dist;
    const auto& vb = (*b.mixture)[0].dist;
    worst = std::max(worst, circ_dist(va.mu().radians(), vb.mu().radians()));
    worst = std::max(worst, std::abs(va.kappa() - vb.kappa()) / std::max(1.0, vb.kappa()));
  }
  return {uniform_start && same_cells && worst <= 1e-12,
          fmt::format("4 chunks of <= {} observations from a uniform start; max parameter difference {:.3g}", chunk,
                      worst)};
}

// 9. Clusters across +-pi and rotation equivariance.
Outcome wraparound() {
  std::vector<Angle> straddle;
  for (int i = 0; i < 40; ++i) {
    straddle.emplace_back(oracle::kPi - 0.01 * i);
    straddle.emplace_back(-oracle::kPi + 0.01 * i);
  }
  const auto labels = dbscan_circle(straddle, 0.05, 5);
  const bool one_cluster = std::all_of(labels.begin(), labels.end(), [](int l) { return l == 0; });

  const auto near_pi = sample(VonMisesMixture::single(VonMises(Angle(oracle::kPi), 20.0)), 2000, 9);
  const auto wrapped = fit_vmm(near_pi, EmConfig{}).mixture;
  const bool wrapped_ok = wrapped.size() == 1 && circ_dist(wrapped[0].dist.mu().radians(), oracle::kPi) < 0.05;

  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> ang(-oracle::kPi, oracle::kPi);
  double vm_err = 0.0;
  double vmm_err = 0.0;
  double eval_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto mix = fixture::random_mixture(rng, 3, 15.0);
    const auto xs = sample(mix, 500, rng());
    const double delta = ang(rng);
    const auto ys = fixture::shifted(xs, delta);

    const auto a = fit_vm(xs).dist;
    const auto b = fit_vm(ys).dist;
    vm_err = std::max({vm_err, circ_dist(a.mu().radians() + delta, b.mu().radians()),
                       std::abs(a.kappa() - b.kappa()) / std::max(1.0, a.kappa())});

    const auto fa = fit_vmm(xs, EmConfig{}).mixture;
    const auto fb = fit_vmm(ys, EmConfig{}).mixture;
    double d = fa.size() == fb.size() ? 0.0 : 1.0;
    for (const auto& ca : fa.components()) {
      double best = 1e300;
      for (const auto& cb : fb.components()) {
        best = std::min(best, circ_dist(ca.dist.mu().radians() + delta, cb.dist.mu().radians()));
      }
      d = std::max(d, best);
    }
    vmm_err = std::max(vmm_err, d);

    eval_err = std::max({eval_err, std::abs(enll(mix, xs) - enll(VonMisesMixture(fixture::shifted_components(mix, delta)), ys)),
                         std::abs(apd_cv(xs, FitMode::vm, 10, EmConfig{}, 3) - apd_cv(ys, FitMode::vm, 10, EmConfig{}, 3))});
  }
  const bool ok = one_cluster && wrapped_ok && vm_err < 1e-9 && vmm_err < 1e-3 && eval_err < 1e-3;
  return {ok, fmt::format("straddling cluster {}, fit near pi {}, rotation errors: vm {:.2g}, vmm {:.2g}, eval {:.2g}",
                          one_cluster ? "single" : "split", wrapped_ok ? "ok" : "wrong", vm_err, vmm_err, eval_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// 10. Map save/load identity and CLI byte-determinism.
Outcome determinism() {
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int map_failures = 0;
  for (int m = 0; m < 20; ++m) {
    const GridSpec spec{-5 * unit(rng), -5 * unit(rng), 1 + 10 * unit(rng), 1 + 10 * unit(rng), dim(rng), dim(rng)};
    std::vector<Observation> obs;
    for (std::size_t c = 0; c < spec.cell_count(); ++c) {
      if (unit(rng) < 0.3) {
        continue;
      }
      const CellIndex idx = spec.unlinear(c);
      for (Angle t : sample(fixture::random_mixture(rng, 3, 30.0), 30 + static_cast<std::size_t>(100 * unit(rng)), rng())) {
        obs.push_back({0.0, std::nullopt, spec.x_min + (static_cast<double>(idx.col) + unit(rng)) * spec.cell_width(),
                       spec.y_min + (static_cast<double>(idx.row) + unit(rng)) * spec.cell_height(), t});
      }
    }
    const auto map = build(obs, spec, m % 2 == 0 ? FitMode::vmm : FitMode::vm, EmConfig{});
    const auto text = save_map(map);
    const auto loaded = load_map(text);
    if (!(loaded == map) || save_map(loaded) != text) {
      ++map_failures;
    }
  }

  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("dirmap_accept_" + std::to_string(rd()));
  fs::create_directories(dir);
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  const auto cli = [&](std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return std::to_string(code) + "\n" + out.str();
  };
  std::vector<std::string> differing;
  const auto twice = [&](const std::string& name, const std::function<std::string(const std::string&)>& step) {
    if (step("1") != step("2")) {
      differing.push_back(name);
    }
  };
  twice("synth", [&](const std::string& k) {
    cli({"synth", "--scene", "multimodal", "--seed", "7", "--agents", "30", "--out", p("s" + k + ".csv")});
    return slurp(p("s" + k + ".csv")) + slurp(p("s" + k + ".csv.truth.csv"));
  });
  twice("build", [&](const std::string& k) {
    cli({"build", "--in", p("s1.csv"), "--seed", "3", "--out", p("m" + k + ".map")});
    return slurp(p("m" + k + ".map"));
  });
  twice("query", [&](const std::string&) {
    return cli({"query", "--map", p("m1.map"), "--x", "5.1", "--y", "3", "--theta", "1.2"}) +
           cli({"query", "--map", p("m1.map"), "--x", "5.1", "--y", "3", "--modes"});
  });
  twice("eval", [&](const std::string&) { return cli({"eval", "--in", p("s1.csv"), "--seed", "5"}); });
  twice("plot", [&](const std::string& k) {
    cli({"plot", "--map", p("m1.map"), "--out", p("p" + k + ".svg")});
    return slurp(p("p" + k + ".svg"));
  });
  const bool outputs_nonempty = !slurp(p("m1.map")).empty() && !slurp(p("p1.svg")).empty();
  fs::remove_all(dir);

  std::string diff_list;
  for (const auto& d : differing) {
    diff_list += " " + d;
  }
  return {map_failures == 0 && differing.empty() && outputs_nonempty,
          fmt::format("20 random maps, {} round-trip failures; CLI synth/build/query/eval/plot repeated: {}",
                      map_failures, differing.empty() ? "byte-identical" : "differ in" + diff_list)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"EM monotonicity and convergence", em_convergence},
      {"MSE ordering", mse_ordering},
      {"ENLL/APD ordering", enll_apd_ordering},
      {"MLE oracle equivalence", mle_oracle},
      {"normalization", normalization},
      {"round-trip estimation", round_trip},
      {"mode recovery", mode_recovery},
      {"online equivalence", online_equivalence},
      {"wraparound and rotation", wraparound},
      {"serialization and CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += r.pass ? 0 : 1;
    std::cout << fmt::format("{} {:2}. {}: {}", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail)
              << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - static_cast<std::size_t>(failed),
                           criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
