#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dirmap {

struct EmConfig {
  double epsilon = 1e-6;          // stop once no component mean moves further than this
  std::size_t max_iterations = 100;
  double dbscan_eps = 0.5;        // radians
  std::size_t dbscan_min_pts = 5;
  /// Core points also need at least this fraction of the sample in their
  /// neighbourhood, so large samples do not chain separate modes together.
  double dbscan_min_fraction = 0.01;
  double alpha_floor = 1e-4;      // components lighter than this are pruned
  std::size_t max_components = 10;
  /// When set, skip density-based initialization and fit exactly this many
  /// components, seeded by circular k-means++ drawn from `seed`.
  std::optional<std::size_t> n_components;
  std::uint64_t seed = 0;

  /// Throws std::domain_error on an out-of-range field.
  void validate() const;
  /// max(dbscan_min_pts, ceil(dbscan_min_fraction * n)).
  [[nodiscard]] std::size_t effective_min_pts(std::size_t n) const;
};

struct EmReport {
  std::size_t iterations = 0;
  /// Negative log-likelihood of the initial parameters followed by one entry
  /// per completed iteration.
  std::vector<double> nll_trace;
  bool converged = false;
  std::size_t m_initial = 0;
  std::size_t m_final = 0;
};

template <class Component>
struct Weighted {
  double alpha = 0.0;
  Component dist;
};

namespace em {

/// Responsibilities are stored row-major, one row of N per component.
/// Returns the negative log-likelihood of `data` under `mix`.
template <class Family>
double e_step(const Family& family, std::span<const Weighted<typename Family::Component>> mix,
              std::span<const typename Family::Sample> data, std::vector<double>& gammas) {
  const std::size_t m_count = mix.size();
  const std::size_t n_count = data.size();
  gammas.assign(m_count * n_count, 0.0);
  std::vector<double> log_alpha(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    log_alpha[m] = std::log(mix[m].alpha);
  }
  double nll = 0.0;
  for (std::size_t n = 0; n < n_count; ++n) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < m_count; ++m) {
      const double lp = log_alpha[m] + family.log_pdf(mix[m].dist, data[n]);
      gammas[m * n_count + n] = lp;
      peak = std::max(peak, lp);
    }
    double total = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      double& g = gammas[m * n_count + n];
      g = std::exp(g - peak);
      total += g;
    }
    for (std::size_t m = 0; m < m_count; ++m) {
      gammas[m * n_count + n] /= total;
    }
    nll -= peak + std::log(total);
  }
  return nll;
}

/// Weighted maximum-likelihood update of every component. Rows whose total
/// responsibility is zero come back empty.
template <class Family>
std::vector<std::optional<Weighted<typename Family::Component>>> m_step(
    const Family& family, std::span<const double> gammas, std::size_t m_count,
    std::span<const typename Family::Sample> data) {
  const std::size_t n_count = data.size();
  std::vector<double> mass(m_count, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t n = 0; n < n_count; ++n) {
      mass[m] += gammas[m * n_count + n];
    }
    total += mass[m];
  }
  std::vector<std::optional<Weighted<typename Family::Component>>> out(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (mass[m] <= 0.0) {
      continue;
    }
    out[m] = Weighted<typename Family::Component>{
        mass[m] / total, family.weighted_fit(data, gammas.subspan(m * n_count, n_count))};
  }
  return out;
}

template <class Component>
void renormalize(std::vector<Weighted<Component>>& mix) {
  double total = 0.0;
  for (const auto& c : mix) {
    total += c.alpha;
  }
  for (auto& c : mix) {
    c.alpha /= total;
  }
}

template <class Component>
struct Result {
  std::vector<Weighted<Component>> components;
  EmReport report;
};

/// Expectation-maximization from the given starting mixture. Iterates while
/// the largest component-mean displacement (as measured by
/// family.mean_shift) exceeds config.epsilon, up to config.max_iterations.
/// Components whose weight falls below config.alpha_floor are pruned when
/// doing so does not raise the negative log-likelihood, so the reported trace
/// is non-increasing.
template <class Family>
Result<typename Family::Component> run(const Family& family,
                                       std::span<const typename Family::Sample> data,
                                       std::vector<Weighted<typename Family::Component>> mix,
                                       const EmConfig& config) {
  using Component = typename Family::Component;
  Result<Component> result;
  result.report.m_initial = mix.size();
  std::vector<double> gammas;
  double nll = e_step<Family>(family, mix, data, gammas);
  result.report.nll_trace.push_back(nll);

  std::vector<double> next_gammas;
  std::vector<double> pruned_gammas;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    auto updated = m_step(family, std::span<const double>(gammas), mix.size(), data);
    std::vector<Weighted<Component>> next;
    std::vector<std::size_t> origin;
    for (std::size_t m = 0; m < updated.size(); ++m) {
      if (updated[m]) {
        next.push_back(*updated[m]);
        origin.push_back(m);
      }
    }
    renormalize(next);
    double next_nll = e_step<Family>(family, next, data, next_gammas);

    const bool has_light = std::any_of(next.begin(), next.end(), [&](const auto& c) {
      return c.alpha < config.alpha_floor;
    });
    if (has_light && next.size() > 1) {
      std::vector<Weighted<Component>> pruned;
      std::vector<std::size_t> pruned_origin;
      for (std::size_t m = 0; m < next.size(); ++m) {
        if (next[m].alpha >= config.alpha_floor) {
          pruned.push_back(next[m]);
          pruned_origin.push_back(origin[m]);
        }
      }
      if (!pruned.empty()) {
        renormalize(pruned);
        const double pruned_nll = e_step<Family>(family, pruned, data, pruned_gammas);
        if (pruned_nll <= next_nll) {
          next = std::move(pruned);
          origin = std::move(pruned_origin);
          next_nll = pruned_nll;
          next_gammas.swap(pruned_gammas);
        }
      }
    }

    double change = std::numeric_limits<double>::infinity();
    if (next.size() == mix.size()) {
      change = 0.0;
      for (std::size_t m = 0; m < next.size(); ++m) {
        change = std::max(change, family.mean_shift(mix[origin[m]].dist, next[m].dist));
      }
    }
    mix = std::move(next);
    gammas.swap(next_gammas);
    nll = next_nll;
    result.report.nll_trace.push_back(nll);
    result.report.iterations = it;
    if (change <= config.epsilon) {
      result.report.converged = true;
      break;
    }
  }
  result.report.m_final = mix.size();
  result.components = std::move(mix);
  return result;
}

}  // namespace em
}  // namespace dirmap
