#include "dirmap/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "dirmap/bessel.hpp"
#include "dirmap/dbscan.hpp"

namespace dirmap {

namespace {

double norm(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) {
    ss += x * x;
  }
  return std::sqrt(ss);
}

void check_dims(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw std::domain_error(std::string(where) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                            std::to_string(b) + ")");
  }
}

double vmf_log_normalizer(std::size_t dim, double kappa) {
  const double d = static_cast<double>(dim);
  if (kappa == 0.0) {
    return std::lgamma(d / 2.0) - std::log(2.0) - (d / 2.0) * std::log(std::numbers::pi);
  }
  const double nu = d / 2.0 - 1.0;
  return nu * std::log(kappa) - (d / 2.0) * std::log(2.0 * std::numbers::pi) - log_bessel_i(nu, kappa);
}

}  // namespace

UnitVector::UnitVector(std::vector<double> components) : v_(std::move(components)) {
  if (v_.size() < 2) {
    throw std::domain_error("UnitVector: dimension must be at least 2");
  }
  const double n = norm(v_);
  if (!(std::abs(n - 1.0) <= 1e-12)) {
    throw std::domain_error("UnitVector: norm must be 1");
  }
}

UnitVector UnitVector::normalized(std::vector<double> components) {
  const double n = norm(components);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::domain_error("UnitVector: cannot normalize a zero or non-finite vector");
  }
  for (double& x : components) {
    x /= n;
  }
  return UnitVector(std::move(components));
}

double dot(const UnitVector& a, const UnitVector& b) {
  check_dims(a.dim(), b.dim(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

VonMisesFisher::VonMisesFisher(UnitVector mu, double kappa) : mu_(std::move(mu)), kappa_(kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa) || kappa > kKappaMax) {
    throw std::domain_error("VonMisesFisher: kappa must lie in [0, kKappaMax]");
  }
  log_c_ = vmf_log_normalizer(mu_.dim(), kappa_);
}

double vmf_log_pdf(const VonMisesFisher& dist, const UnitVector& x) {
  check_dims(dist.dim(), x.dim(), "vmf_pdf");
  return dist.log_normalizer() + dist.kappa() * dot(dist.mu(), x);
}

double vmf_pdf(const VonMisesFisher& dist, const UnitVector& x) {
  return std::exp(vmf_log_pdf(dist, x));
}

VmfFit fit_vmf(std::span<const UnitVector> xs, std::span<const double> weights) {
  if (xs.empty()) {
    throw std::domain_error("fit_vmf: empty sample");
  }
  check_dims(xs.size(), weights.size(), "fit_vmf weights");
  const std::size_t dim = xs[0].dim();
  std::vector<double> sum(dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_dims(dim, xs[i].dim(), "fit_vmf");
    total += weights[i];
    for (std::size_t k = 0; k < dim; ++k) {
      sum[k] += weights[i] * xs[i][k];
    }
  }
  if (!(total > 0.0)) {
    throw std::domain_error("fit_vmf: total weight must be positive");
  }
  const double length = norm(sum);
  const double r = length / total;
  if (r < 1e-12) {
    std::vector<double> axis(dim, 0.0);
    axis[0] = 1.0;
    return {VonMisesFisher(UnitVector(std::move(axis)), 0.0), true, false};
  }
  auto mu = UnitVector::normalized(std::move(sum));
  const double d = static_cast<double>(dim);
  const double kappa = r * (d - r * r) / (1.0 - r * r);
  if (r >= 1.0 || !(kappa < kKappaMax)) {
    return {VonMisesFisher(std::move(mu), kKappaMax), false, true};
  }
  return {VonMisesFisher(std::move(mu), kappa), false, false};
}

VmfFit fit_vmf(std::span<const UnitVector> xs) {
  const std::vector<double> ones(xs.size(), 1.0);
  return fit_vmf(xs, ones);
}

std::vector<UnitVector> sample_vmf(const VonMisesFisher& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) {
    throw std::domain_error("sample_vmf: n must be at least 1");
  }
  const std::size_t dim = dist.dim();
  const double m1 = static_cast<double>(dim) - 1.0;
  const double kappa = dist.kappa();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> gamma(m1 / 2.0, 1.0);

  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);

  // Householder reflection taking the last axis onto mu.
  std::vector<double> u(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    u[k] = (k + 1 == dim ? 1.0 : 0.0) - dist.mu()[k];
  }
  double uu = 0.0;
  for (double v : u) {
    uu += v * v;
  }

  std::vector<UnitVector> out;
  out.reserve(n);
  std::vector<double> x(dim);
  while (out.size() < n) {
    double w = 0.0;
    while (true) {
      const double g1 = gamma(rng);
      const double g2 = gamma(rng);
      const double z = g1 / (g1 + g2);
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      const double accept = kappa * w + m1 * std::log(1.0 - x0 * w) - c;
      if (accept >= std::log(unit(rng))) {
        break;
      }
    }
    double vv = 0.0;
    for (std::size_t k = 0; k + 1 < dim; ++k) {
      x[k] = normal(rng);
      vv += x[k] * x[k];
    }
    const double scale = std::sqrt(std::max(0.0, 1.0 - w * w)) / std::sqrt(vv);
    for (std::size_t k = 0; k + 1 < dim; ++k) {
      x[k] *= scale;
    }
    x[dim - 1] = w;
    if (uu > 1e-30) {
      double ux = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        ux += u[k] * x[k];
      }
      for (std::size_t k = 0; k < dim; ++k) {
        x[k] -= 2.0 * u[k] * ux / uu;
      }
    }
    out.push_back(UnitVector::normalized(x));
  }
  return out;
}

double VmfFamily::mean_shift(const VonMisesFisher& a, const VonMisesFisher& b) const {
  check_dims(a.dim(), b.dim(), "mean_shift");
  double ss = 0.0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    ss += (a.mu()[k] - b.mu()[k]) * (a.mu()[k] - b.mu()[k]);
  }
  return std::sqrt(ss);
}

double vmf_mixture_pdf(std::span<const VmfComponent> mix, const UnitVector& x) {
  double total = 0.0;
  for (const auto& c : mix) {
    total += c.alpha * vmf_pdf(c.dist, x);
  }
  return total;
}

VmfMixtureFit fit_vmf_mixture(std::span<const UnitVector> xs, const EmConfig& config) {
  config.validate();
  if (xs.empty()) {
    throw std::domain_error("fit_vmf_mixture: empty sample");
  }
  const std::size_t dim = xs[0].dim();
  for (const auto& x : xs) {
    check_dims(dim, x.dim(), "fit_vmf_mixture");
  }
  const double cos_eps = std::cos(config.dbscan_eps);
  const auto labels = dbscan(xs.size(), config.effective_min_pts(xs.size()),
                             [&](std::size_t i, std::vector<std::size_t>& out) {
                               for (std::size_t j = 0; j < xs.size(); ++j) {
                                 if (dot(xs[i], xs[j]) >= cos_eps) {
                                   out.push_back(j);
                                 }
                               }
                             });
  const int clusters = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(std::max(clusters, 1)), std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(sums.size(), 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t k = clusters == 0 ? 0 : static_cast<std::size_t>(std::max(labels[i], 0));
    if (clusters > 0 && labels[i] == kNoise) {
      continue;
    }
    ++counts[k];
    for (std::size_t d = 0; d < dim; ++d) {
      sums[k][d] += xs[i][d];
    }
  }
  std::vector<std::size_t> order(sums.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    order[k] = k;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  if (order.size() > config.max_components) {
    order.resize(config.max_components);
  }
  std::sort(order.begin(), order.end());
  std::vector<VmfComponent> start;
  for (std::size_t k : order) {
    if (norm(sums[k]) > 0.0) {
      start.push_back({0.0, VonMisesFisher(UnitVector::normalized(sums[k]), 1.0)});
    }
  }
  if (start.empty()) {
    std::vector<double> axis(dim, 0.0);
    axis[0] = 1.0;
    start.push_back({0.0, VonMisesFisher(UnitVector(std::move(axis)), 1.0)});
  }
  for (auto& c : start) {
    c.alpha = 1.0 / static_cast<double>(start.size());
  }
  auto result = em::run(VmfFamily{}, xs, std::move(start), config);
  return {std::move(result.components), std::move(result.report)};
}

}  // namespace dirmap
