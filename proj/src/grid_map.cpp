#include "dirmap/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dirmap {

namespace {

EmReport vm_report() {
  EmReport report;
  report.converged = true;
  report.m_initial = 1;
  report.m_final = 1;
  return report;
}

std::vector<ResultantSums> component_sums(const VonMisesMixture& mix, std::span<const Angle> thetas) {
  const auto gammas = responsibilities(mix, thetas);
  std::vector<ResultantSums> sums(mix.size());
  for (std::size_t m = 0; m < mix.size(); ++m) {
    for (std::size_t n = 0; n < thetas.size(); ++n) {
      sums[m].add(thetas[n], gammas(m, n));
    }
  }
  return sums;
}

CellModel fit_cell(CellIndex index, std::span<const Angle> thetas, FitMode mode, const EmConfig& config) {
  CellModel cell;
  cell.index = index;
  cell.n_obs = thetas.size();
  if (mode == FitMode::vm) {
    ResultantSums sums;
    for (Angle t : thetas) {
      sums.add(t);
    }
    cell.mixture = VonMisesMixture::single(fit_vm(sums).dist);
    cell.report = vm_report();
    cell.stats = {sums};
    return cell;
  }
  auto fit = fit_vmm(thetas, config);
  cell.stats = component_sums(fit.mixture, thetas);
  cell.mixture = std::move(fit.mixture);
  cell.report = std::move(fit.report);
  return cell;
}

std::vector<std::vector<Angle>> bucket(std::span<const Observation> observations, const GridSpec& spec,
                                       std::size_t& outside) {
  std::vector<std::vector<Angle>> buckets(spec.cell_count());
  outside = 0;
  for (const Observation& o : observations) {
    if (const auto c = cell_of(spec, o.x, o.y)) {
      buckets[spec.linear(*c)].push_back(o.theta);
    } else {
      ++outside;
    }
  }
  return buckets;
}

struct Absorbed {
  std::vector<MixtureComponent> components;
  std::vector<ResultantSums> stats;
  EmReport report;
};

// EM over the new samples only; `prior` holds each component's statistics from
// earlier data and stays fixed. The trace is the NLL of the new samples.
Absorbed absorb(std::vector<MixtureComponent> mix, std::vector<ResultantSums> prior,
                std::span<const Angle> fresh, const EmConfig& config) {
  const VonMisesFamily family;
  Absorbed out;
  out.report.m_initial = mix.size();
  std::vector<double> gammas;
  out.report.nll_trace.push_back(em::e_step(family, std::span<const MixtureComponent>(mix), fresh, gammas));
  const std::size_t n = fresh.size();
  std::vector<ResultantSums> combined;

  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    combined = prior;
    for (std::size_t m = 0; m < mix.size(); ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        combined[m].add(fresh[i], gammas[m * n + i]);
      }
    }
    double total = 0.0;
    for (const auto& s : combined) {
      total += s.weight;
    }
    std::vector<MixtureComponent> next;
    std::vector<std::size_t> origin;
    for (std::size_t m = 0; m < mix.size(); ++m) {
      const double alpha = combined[m].weight / total;
      if (combined[m].empty() || (alpha < config.alpha_floor && mix.size() > 1)) {
        continue;
      }
      next.push_back({alpha, fit_vm(combined[m]).dist});
      origin.push_back(m);
    }
    if (next.empty()) {
      // Every component fell below the floor; keep the heaviest.
      const auto heaviest = static_cast<std::size_t>(
          std::max_element(combined.begin(), combined.end(),
                           [](const auto& a, const auto& b) { return a.weight < b.weight; }) -
          combined.begin());
      next.push_back({1.0, fit_vm(combined[heaviest]).dist});
      origin.push_back(heaviest);
    }
    em::renormalize(next);

    double change = std::numeric_limits<double>::infinity();
    if (next.size() == mix.size()) {
      change = 0.0;
      for (std::size_t m = 0; m < next.size(); ++m) {
        change = std::max(change, family.mean_shift(mix[origin[m]].dist, next[m].dist));
      }
    }
    std::vector<ResultantSums> kept_prior;
    std::vector<ResultantSums> kept_combined;
    for (std::size_t m : origin) {
      kept_prior.push_back(prior[m]);
      kept_combined.push_back(combined[m]);
    }
    prior = std::move(kept_prior);
    combined = std::move(kept_combined);
    mix = std::move(next);
    out.report.nll_trace.push_back(em::e_step(family, std::span<const MixtureComponent>(mix), fresh, gammas));
    out.report.iterations = it;
    if (change <= config.epsilon) {
      out.report.converged = true;
      break;
    }
  }
  out.report.m_final = mix.size();
  out.components = std::move(mix);
  out.stats = std::move(combined);
  return out;
}

CellModel update_vmm_cell(const CellModel& old, std::span<const Angle> fresh, const EmConfig& config) {
  if (!old.observed()) {
    return fit_cell(old.index, fresh, FitMode::vmm, config);
  }
  const auto& components = old.mixture->components();
  auto warm = absorb({components.begin(), components.end()}, old.stats, fresh, config);

  // Re-initialize only if a fresh fit of the new samples beats the warm start
  // and brings directions the map does not have yet.
  const auto fresh_fit = fit_vmm(fresh, config);
  const double slack = 1e-9 * static_cast<double>(fresh.size());
  if (warm.report.nll_trace.back() > fresh_fit.report.nll_trace.back() + slack &&
      components.size() < config.max_components) {
    const double n_old = static_cast<double>(old.n_obs);
    const double n_new = static_cast<double>(fresh.size());
    std::vector<MixtureComponent> init;
    std::vector<ResultantSums> prior;
    for (std::size_t m = 0; m < components.size(); ++m) {
      init.push_back({components[m].alpha * n_old, components[m].dist});
      prior.push_back(old.stats[m]);
    }
    for (const auto& c : fresh_fit.mixture.components()) {
      const bool novel = std::all_of(components.begin(), components.end(), [&](const auto& known) {
        return angular_distance(known.dist.mu(), c.dist.mu()) > config.dbscan_eps;
      });
      if (novel && init.size() < config.max_components) {
        init.push_back({c.alpha * n_new, c.dist});
        prior.emplace_back();
      }
    }
    if (init.size() > components.size()) {
      em::renormalize(init);
      warm = absorb(std::move(init), std::move(prior), fresh, config);
    }
  }

  CellModel cell;
  cell.index = old.index;
  cell.n_obs = old.n_obs + fresh.size();
  cell.mixture = VonMisesMixture(std::move(warm.components));
  cell.stats = std::move(warm.stats);
  cell.report = std::move(warm.report);
  return cell;
}

}  // namespace

DirectionalGridMap::DirectionalGridMap(GridSpec spec, FitMode mode) : spec_(spec), mode_(mode) {
  spec_.validate();
  cells_.resize(spec_.cell_count());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].index = spec_.unlinear(i);
  }
}

std::size_t DirectionalGridMap::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const CellModel& c) { return c.observed(); }));
}

bool operator==(const DirectionalGridMap& a, const DirectionalGridMap& b) {
  if (!(a.spec_ == b.spec_) || a.mode_ != b.mode_ || a.cells_.size() != b.cells_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.cells_.size(); ++i) {
    if (a.cells_[i].n_obs != b.cells_[i].n_obs || a.cells_[i].mixture != b.cells_[i].mixture) {
      return false;
    }
  }
  return true;
}

DirectionalGridMap build(std::span<const Observation> observations, const GridSpec& spec, FitMode mode,
                         const EmConfig& config) {
  config.validate();
  DirectionalGridMap map(spec, mode);
  const auto buckets = bucket(observations, spec, map.outside_);
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (!buckets[i].empty()) {
      map.cells_[i] = fit_cell(spec.unlinear(i), buckets[i], mode, config);
    }
  }
  map.no_observations_ = map.observed_count() == 0;
  return map;
}

DirectionalGridMap build(const ObservationStore& store, FitMode mode, const EmConfig& config) {
  return build(store.observations(), store.spec(), mode, config);
}

std::vector<SiteModel> build_at_sites(std::span<const Observation> observations, const SiteSet& sites,
                                      FitMode mode, const EmConfig& config) {
  if (sites.sites.empty()) {
    throw std::domain_error("build_at_sites: no sites");
  }
  if (!(sites.radius > 0.0) || !std::isfinite(sites.radius)) {
    throw std::domain_error("build_at_sites: radius must be positive");
  }
  config.validate();
  std::vector<SiteModel> out;
  for (const Site& site : sites.sites) {
    std::vector<Angle> thetas;
    for (const Observation& o : observations) {
      if (std::hypot(o.x - site.x, o.y - site.y) <= sites.radius) {
        thetas.push_back(o.theta);
      }
    }
    SiteModel model{site, std::nullopt, thetas.size(), std::nullopt};
    if (!thetas.empty()) {
      auto fit = fit_mixture(thetas, mode, config);
      model.mixture = std::move(fit.mixture);
      model.report = std::move(fit.report);
    }
    out.push_back(std::move(model));
  }
  return out;
}

QueryResult query(const DirectionalGridMap& map, double x, double y, Angle theta) {
  const auto c = cell_of(map.spec(), x, y);
  if (!c || !map.cell(*c).observed()) {
    return {1.0 / kTwoPi, false};
  }
  return {vmm_pdf(*map.cell(*c).mixture, theta), true};
}

DirectionalGridMap update_online(const DirectionalGridMap& map, std::span<const Observation> observations,
                                 const EmConfig& config) {
  config.validate();
  DirectionalGridMap next = map;
  std::size_t outside = 0;
  const auto buckets = bucket(observations, map.spec(), outside);
  next.outside_ += outside;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].empty()) {
      continue;
    }
    CellModel& cell = next.cells_[i];
    if (map.mode() == FitMode::vmm) {
      cell = update_vmm_cell(cell, buckets[i], config);
      continue;
    }
    if (cell.stats.empty()) {
      cell.stats.resize(1);
    }
    for (Angle t : buckets[i]) {
      cell.stats[0].add(t);
    }
    cell.n_obs += buckets[i].size();
    cell.mixture = VonMisesMixture::single(fit_vm(cell.stats[0]).dist);
    cell.report = vm_report();
  }
  next.no_observations_ = next.observed_count() == 0;
  return next;
}

DirectionalGridMap update_online(const DirectionalGridMap& map, const ObservationStore& store,
                                 const EmConfig& config) {
  if (!(store.spec() == map.spec())) {
    throw std::domain_error("update_online: observation grid does not match the map grid");
  }
  return update_online(map, store.observations(), config);
}

}  // namespace dirmap
