#include "dirmap/vmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dirmap/dbscan.hpp"

namespace dirmap {

void EmConfig::validate() const {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("EmConfig: epsilon must be positive");
  }
  if (max_iterations < 1) {
    throw std::domain_error("EmConfig: max_iterations must be at least 1");
  }
  if (!(dbscan_eps > 0.0 && dbscan_eps <= kPi)) {
    throw std::domain_error("EmConfig: dbscan_eps must lie in (0, pi]");
  }
  if (dbscan_min_pts < 1) {
    throw std::domain_error("EmConfig: dbscan_min_pts must be at least 1");
  }
  if (!(dbscan_min_fraction >= 0.0 && dbscan_min_fraction <= 1.0)) {
    throw std::domain_error("EmConfig: dbscan_min_fraction must lie in [0, 1]");
  }
  if (!(alpha_floor >= 0.0 && alpha_floor < 1.0)) {
    throw std::domain_error("EmConfig: alpha_floor must lie in [0, 1)");
  }
  if (max_components < 1 || (n_components && *n_components < 1)) {
    throw std::domain_error("EmConfig: component counts must be at least 1");
  }
}

std::size_t EmConfig::effective_min_pts(std::size_t n) const {
  const auto scaled = static_cast<std::size_t>(std::ceil(dbscan_min_fraction * static_cast<double>(n)));
  return std::max(dbscan_min_pts, scaled);
}

VonMisesMixture::VonMisesMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::domain_error("VonMisesMixture: needs at least one component");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.alpha >= 0.0)) {
      throw std::domain_error("VonMisesMixture: negative weight");
    }
    total += c.alpha;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::domain_error("VonMisesMixture: weights must sum to 1");
  }
}

VonMisesMixture VonMisesMixture::single(const VonMises& dist) {
  return VonMisesMixture({MixtureComponent{1.0, dist}});
}

VonMisesMixture VonMisesMixture::uniform() { return single(VonMises(Angle(0.0), 0.0)); }

double VonMisesMixture::log_pdf(Angle theta) const {
  if (components_.size() == 1) {
    return vm_log_pdf(components_.front().dist, theta);
  }
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    const double t = c.alpha > 0.0 ? std::log(c.alpha) + vm_log_pdf(c.dist, theta)
                                    : -std::numeric_limits<double>::infinity();
    terms.push_back(t);
    peak = std::max(peak, t);
  }
  double total = 0.0;
  for (double t : terms) {
    total += std::exp(t - peak);
  }
  return peak + std::log(total);
}

double VonMisesMixture::pdf(Angle theta) const {
  double total = 0.0;
  for (const auto& c : components_) {
    total += c.alpha * vm_pdf(c.dist, theta);
  }
  return total;
}

bool operator==(const VonMisesMixture& a, const VonMisesMixture& b) {
  return std::equal(a.components_.begin(), a.components_.end(), b.components_.begin(),
                    b.components_.end(), [](const auto& x, const auto& y) {
                      return x.alpha == y.alpha && x.dist == y.dist;
                    });
}

double vmm_pdf(const VonMisesMixture& mix, Angle theta) { return mix.pdf(theta); }

VonMises VonMisesFamily::weighted_fit(std::span<const Angle> thetas,
                                      std::span<const double> weights) const {
  ResultantSums sums;
  for (std::size_t n = 0; n < thetas.size(); ++n) {
    sums.add(thetas[n], weights[n]);
  }
  return fit_vm(sums).dist;
}

double VonMisesFamily::mean_shift(const VonMises& a, const VonMises& b) const {
  const double ma = a.mu().radians();
  const double mb = b.mu().radians();
  return std::hypot(std::cos(ma) - std::cos(mb), std::sin(ma) - std::sin(mb));
}

Responsibilities::Responsibilities(std::size_t components, std::size_t samples,
                                   std::vector<double> values)
    : rows_(components), cols_(samples), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw std::domain_error("Responsibilities: size mismatch");
  }
}

Responsibilities responsibilities(const VonMisesMixture& mix, std::span<const Angle> thetas) {
  if (thetas.empty()) {
    throw std::domain_error("responsibilities: empty sample");
  }
  std::vector<double> gammas;
  em::e_step(VonMisesFamily{}, mix.components(), thetas, gammas);
  return Responsibilities(mix.size(), thetas.size(), std::move(gammas));
}

std::vector<MixtureComponent> m_step(const Responsibilities& gammas, std::span<const Angle> thetas) {
  if (gammas.samples() != thetas.size()) {
    throw std::domain_error("m_step: responsibilities do not match the sample");
  }
  auto rows = em::m_step(VonMisesFamily{}, gammas.values(), gammas.components(), thetas);
  std::vector<MixtureComponent> out;
  for (auto& r : rows) {
    if (r) {
      out.push_back(*r);
    }
  }
  em::renormalize(out);
  return out;
}

std::vector<int> dbscan_circle(std::span<const Angle> thetas, double eps, std::size_t min_pts) {
  const std::size_t n = thetas.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return thetas[a].radians() < thetas[b].radians();
  });
  std::vector<double> sorted(n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = thetas[order[k]].radians();
  }
  // Candidate ranges are padded and then filtered with the exact metric.
  constexpr double kPad = 1e-9;
  const bool everything = eps + kPad >= kPi;
  auto collect = [&](double lo, double hi, std::size_t i, std::vector<std::size_t>& out) {
    auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
    auto last = std::upper_bound(sorted.begin(), sorted.end(), hi);
    for (auto it = first; it < last; ++it) {
      const std::size_t j = order[static_cast<std::size_t>(it - sorted.begin())];
      if (angular_distance(thetas[i], thetas[j]) <= eps) {
        out.push_back(j);
      }
    }
  };
  auto neighbors = [&](std::size_t i, std::vector<std::size_t>& out) {
    const double a = thetas[i].radians();
    if (everything) {
      collect(-kPi - 1.0, kPi + 1.0, i, out);
      return;
    }
    collect(a - eps - kPad, a + eps + kPad, i, out);
    if (a - eps - kPad < -kPi) {
      collect(a - eps - kPad + kTwoPi, kPi, i, out);
    }
    if (a + eps + kPad > kPi) {
      collect(-kPi, a + eps + kPad - kTwoPi, i, out);
    }
  };
  return dbscan(n, min_pts, neighbors);
}

std::vector<Angle> init_clusters(std::span<const Angle> thetas, const EmConfig& config) {
  if (thetas.empty()) {
    throw std::domain_error("init_clusters: empty sample");
  }
  const auto labels = dbscan_circle(thetas, config.dbscan_eps, config.effective_min_pts(thetas.size()));
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (clusters == 0) {
    return {circular_stats(thetas).mean_dir};
  }
  std::vector<ResultantSums> sums(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (labels[i] != kNoise) {
      sums[static_cast<std::size_t>(labels[i])].add(thetas[i]);
    }
  }
  std::vector<std::size_t> keep(sums.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (keep.size() > config.max_components) {
    std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
      return sums[a].weight > sums[b].weight;
    });
    keep.resize(config.max_components);
    std::sort(keep.begin(), keep.end());
  }
  std::vector<Angle> centers;
  for (std::size_t k : keep) {
    centers.emplace_back(std::atan2(sums[k].sum_sin, sums[k].sum_cos));
  }
  return centers;
}

namespace {

std::vector<Angle> kmeans_init(std::span<const Angle> thetas, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = thetas.size();
  std::vector<Angle> centers{thetas[std::min(n - 1, static_cast<std::size_t>(unit(rng) * n))]};
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Angle c : centers) {
        best = std::min(best, angular_distance(thetas[i], c));
      }
      d2[i] = best * best;
      total += d2[i];
    }
    if (total <= 0.0) {
      break;
    }
    double target = unit(rng) * total;
    std::size_t pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      target -= d2[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(thetas[pick]);
  }
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<ResultantSums> sums(centers.size());
    for (Angle t : thetas) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < centers.size(); ++c) {
        if (angular_distance(t, centers[c]) < angular_distance(t, centers[best])) {
          best = c;
        }
      }
      sums[best].add(t);
    }
    bool moved = false;
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (sums[c].mean_resultant_length() < kUniformResultant) {
        continue;
      }
      const Angle next(std::atan2(sums[c].sum_sin, sums[c].sum_cos));
      moved = moved || next != centers[c];
      centers[c] = next;
    }
    if (!moved) {
      break;
    }
  }
  return centers;
}

std::size_t distinct_count(std::span<const Angle> thetas, std::size_t cap) {
  std::vector<double> v;
  v.reserve(thetas.size());
  for (Angle t : thetas) {
    v.push_back(t.radians());
  }
  std::sort(v.begin(), v.end());
  const auto d = static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  return std::min(d, cap);
}

}  // namespace

VmmFit fit_vmm_from(std::span<const Angle> thetas, const VonMisesMixture& initial,
                    const EmConfig& config) {
  config.validate();
  if (thetas.empty()) {
    throw std::domain_error("fit_vmm: empty sample");
  }
  std::vector<MixtureComponent> start(initial.components().begin(), initial.components().end());
  auto result = em::run(VonMisesFamily{}, thetas, std::move(start), config);
  return {VonMisesMixture(std::move(result.components)), std::move(result.report)};
}

VmmFit fit_vmm(std::span<const Angle> thetas, const EmConfig& config) {
  config.validate();
  if (thetas.empty()) {
    throw std::domain_error("fit_vmm: empty sample");
  }
  std::vector<Angle> means = config.n_components
                                 ? kmeans_init(thetas, *config.n_components, config.seed)
                                 : init_clusters(thetas, config);
  const std::size_t cap = config.n_components ? *config.n_components : config.max_components;
  means.resize(std::min(means.size(), distinct_count(thetas, cap)));
  std::vector<MixtureComponent> start;
  for (Angle mu : means) {
    start.push_back({1.0 / static_cast<double>(means.size()), VonMises(mu, 1.0)});
  }
  return fit_vmm_from(thetas, VonMisesMixture(std::move(start)), config);
}

Angle sample_vm(const VonMises& dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double kappa = dist.kappa();
  if (kappa < 1e-8) {
    return Angle(kPi - kTwoPi * unit(rng));
  }
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  double f = 0.0;
  for (;;) {
    const double u1 = unit(rng);
    const double u2 = unit(rng);
    const double z = std::cos(kPi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      break;
    }
  }
  const double u3 = unit(rng);
  const double offset = std::acos(std::clamp(f, -1.0, 1.0));
  return Angle(dist.mu().radians() + (u3 > 0.5 ? offset : -offset));
}

std::vector<Angle> sample(const VonMisesMixture& mix, std::size_t n, std::uint64_t seed) {
  if (n < 1) {
    throw std::domain_error("sample: n must be at least 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Angle> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    if (mix.size() > 1) {
      double u = unit(rng);
      m = mix.size() - 1;
      for (std::size_t k = 0; k + 1 < mix.size(); ++k) {
        u -= mix[k].alpha;
        if (u < 0.0) {
          m = k;
          break;
        }
      }
    }
    out.push_back(sample_vm(mix[m].dist, rng));
  }
  return out;
}

ModeSearch find_modes(const VonMisesMixture& mix) {
  constexpr std::size_t kGrid = 3600;
  constexpr double kStep = kTwoPi / kGrid;
  std::vector<double> logp(kGrid);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < kGrid; ++i) {
    logp[i] = mix.log_pdf(Angle(-kPi + kStep * static_cast<double>(i + 1)));
    lo = std::min(lo, logp[i]);
    hi = std::max(hi, logp[i]);
  }
  ModeSearch out;
  if (std::exp(hi) - std::exp(lo) < 1e-12) {
    out.uniform = true;
    return out;
  }
  const auto f = [&](double x) { return mix.log_pdf(Angle(x)); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<std::pair<double, double>> found;  // (angle, log density)
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double prev = logp[(i + kGrid - 1) % kGrid];
    const double next = logp[(i + 1) % kGrid];
    if (!(logp[i] > prev && logp[i] >= next)) {
      continue;
    }
    const double center = -kPi + kStep * static_cast<double>(i + 1);
    double a = center - kStep;
    double b = center + kStep;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > 1e-9) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = f(d);
      }
    }
    const double x = wrap(0.5 * (a + b));
    found.emplace_back(x, f(x));
  }
  std::sort(found.begin(), found.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& m : found) {
    if (!merged.empty() && angular_distance(Angle(m.first), Angle(merged.back().first)) < 1e-6) {
      if (m.second > merged.back().second) {
        merged.back() = m;
      }
      continue;
    }
    merged.push_back(m);
  }
  if (merged.size() > 1 &&
      angular_distance(Angle(merged.front().first), Angle(merged.back().first)) < 1e-6) {
    if (merged.back().second > merged.front().second) {
      merged.front() = merged.back();
    }
    merged.pop_back();
    std::sort(merged.begin(), merged.end());
  }
  for (const auto& m : merged) {
    out.modes.emplace_back(m.first);
  }
  return out;
}

}  // namespace dirmap

namespace dirmap {

VmmFit fit_mixture(std::span<const Angle> thetas, FitMode mode, const EmConfig& config) {
  if (mode == FitMode::vmm) {
    return fit_vmm(thetas, config);
  }
  EmReport report;
  report.converged = true;
  report.m_initial = 1;
  report.m_final = 1;
  return {VonMisesMixture::single(fit_vm(thetas).dist), report};
}

}  // namespace dirmap
