#include "dirmap/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace dirmap {

double enll(const VonMisesMixture& mix, std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("enll: no data");
  }
  double total = 0.0;
  for (Angle t : thetas) {
    total -= mix.log_pdf(t);
  }
  return total / static_cast<double>(thetas.size());
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw std::domain_error("folds: need at least 2 folds");
  }
  if (n < k) {
    throw std::domain_error("folds: " + std::to_string(n) + " samples cannot fill " + std::to_string(k) +
                            " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng() % (i + 1)]);
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                    order.begin() + static_cast<std::ptrdiff_t>(start + size));
    start += size;
  }
  return folds;
}

namespace {

struct Split {
  std::vector<Angle> train;
  std::vector<Angle> test;
};

Split split(std::span<const Angle> thetas, const std::vector<std::vector<std::size_t>>& folds, std::size_t f) {
  Split s;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    for (std::size_t i : folds[g]) {
      (g == f ? s.test : s.train).push_back(thetas[i]);
    }
  }
  return s;
}

double mean_density(const VonMisesMixture& mix, std::span<const Angle> thetas) {
  double total = 0.0;
  for (Angle t : thetas) {
    total += vmm_pdf(mix, t);
  }
  return total / static_cast<double>(thetas.size());
}

Fitter mode_fitter(FitMode mode, const EmConfig& config) {
  return [mode, config](std::span<const Angle> xs) { return fit_mixture(xs, mode, config).mixture; };
}

}  // namespace

double apd_cv(std::span<const Angle> thetas, const Fitter& fit, std::size_t k, std::uint64_t seed) {
  const auto folds = make_folds(thetas.size(), k, seed);
  double total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    const auto s = split(thetas, folds, f);
    total += mean_density(fit(s.train), s.test);
  }
  return total / static_cast<double>(k);
}

double apd_cv(std::span<const Angle> thetas, FitMode mode, std::size_t k, const EmConfig& config,
              std::uint64_t seed) {
  return apd_cv(thetas, mode_fitter(mode, config), k, seed);
}

double mse_closest_mode(const VonMisesMixture& mix, std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("mse_closest_mode: no data");
  }
  const auto search = find_modes(mix);
  if (search.modes.empty()) {
    throw std::domain_error("mse_closest_mode: the mixture is uniform and has no modes");
  }
  double total = 0.0;
  for (Angle t : thetas) {
    double best = std::numeric_limits<double>::infinity();
    for (Angle m : search.modes) {
      best = std::min(best, angular_distance(t, m));
    }
    total += best * best;
  }
  return total / static_cast<double>(thetas.size());
}

double kl_divergence(const VonMisesMixture& p, const VonMisesMixture& q, std::size_t n_grid) {
  if (n_grid < 2) {
    throw std::domain_error("kl_divergence: n_grid must be at least 2");
  }
  const double h = kTwoPi / static_cast<double>(n_grid);
  double total = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) {
    const Angle t(-kPi + h * static_cast<double>(i));
    const double lp = p.log_pdf(t);
    total += std::exp(lp) * (lp - q.log_pdf(t));
  }
  return total * h;
}

double MetricReport::fit_ms_mean() const {
  if (fit_ms.empty()) {
    return 0.0;
  }
  return std::accumulate(fit_ms.begin(), fit_ms.end(), 0.0) / static_cast<double>(fit_ms.size());
}

double MetricReport::fit_ms_sd() const {
  if (fit_ms.size() < 2) {
    return 0.0;
  }
  const double mean = fit_ms_mean();
  double ss = 0.0;
  for (double v : fit_ms) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(fit_ms.size() - 1));
}

std::string_view method_name(FitMode mode) {
  return mode == FitMode::vm ? "DGM-VM" : "DGM-VMM";
}

namespace {

MetricReport evaluate(std::span<const Angle> thetas, FitMode mode, const EmConfig& config,
                      const std::vector<std::vector<std::size_t>>& folds) {
  MetricReport r;
  r.method = mode;
  r.samples = thetas.size();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto s = split(thetas, folds, f);
    const auto start = std::chrono::steady_clock::now();
    const auto model = fit_mixture(s.train, mode, config).mixture;
    const auto stop = std::chrono::steady_clock::now();
    r.fit_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    r.enll += enll(model, s.test);
    r.apd += mean_density(model, s.test);
  }
  r.enll /= static_cast<double>(folds.size());
  r.apd /= static_cast<double>(folds.size());
  r.mse_closest_mode = mse_closest_mode(fit_mixture(thetas, mode, config).mixture, thetas);
  return r;
}

void accumulate(MetricReport& into, const MetricReport& part) {
  const double w = static_cast<double>(part.samples);
  into.enll += w * part.enll;
  into.apd += w * part.apd;
  into.mse_closest_mode += w * part.mse_closest_mode;
  into.samples += part.samples;
  into.fit_ms.insert(into.fit_ms.end(), part.fit_ms.begin(), part.fit_ms.end());
}

void finish(MetricReport& r) {
  const double w = static_cast<double>(r.samples);
  r.enll /= w;
  r.apd /= w;
  r.mse_closest_mode /= w;
}

}  // namespace

Comparison compare(std::span<const Angle> thetas, const EmConfig& config, std::uint64_t seed, std::size_t folds) {
  config.validate();
  const auto assignment = make_folds(thetas.size(), folds, seed);
  return {evaluate(thetas, FitMode::vm, config, assignment), evaluate(thetas, FitMode::vmm, config, assignment)};
}

CellComparison compare_cells(const ObservationStore& store, const EmConfig& config, std::uint64_t seed,
                             std::size_t folds) {
  CellComparison out;
  out.totals.vm.method = FitMode::vm;
  out.totals.vmm.method = FitMode::vmm;
  const GridSpec& spec = store.spec();
  for (std::size_t i = 0; i < spec.cell_count(); ++i) {
    const CellIndex c = spec.unlinear(i);
    const auto thetas = store.slice_cell(c.col, c.row);
    if (thetas.empty()) {
      continue;
    }
    if (thetas.size() < folds) {
      ++out.cells_skipped;
      continue;
    }
    const auto part = compare(thetas, config, seed, folds);
    accumulate(out.totals.vm, part.vm);
    accumulate(out.totals.vmm, part.vmm);
    ++out.cells_evaluated;
  }
  if (out.cells_evaluated == 0) {
    throw std::domain_error("compare_cells: no cell has at least " + std::to_string(folds) + " samples");
  }
  finish(out.totals.vm);
  finish(out.totals.vmm);
  return out;
}

}  // namespace dirmap
