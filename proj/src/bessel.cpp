#include "dirmap/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dirmap/angle.hpp"

namespace dirmap {
namespace {

constexpr double kSeriesLimit = 50.0;
constexpr int kSeriesTerms = 100;

void check_argument(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error(std::string(what) + ": argument must be finite and non-negative");
  }
}

// sum_{p>=0} (x/2)^{2p} / (p! (p+nu)!) * nu!, i.e. the series normalized by its
// leading term. Terms stop once they no longer change the partial sum.
double normalized_series(double nu, double x, int max_terms) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int p = 0; p < max_terms; ++p) {
    term *= q / ((p + 1.0) * (p + 1.0 + nu));
    sum += term;
    if (term < 1e-16 * sum) {
      break;
    }
  }
  return sum;
}

// Hankel expansion sum_k (-1)^k a_k(nu) / x^k, truncated at its smallest term.
double asymptotic_sum(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) {
      break;
    }
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) {
      break;
    }
  }
  return sum;
}

bool use_asymptotic(double nu, double x) {
  return x > std::max(kSeriesLimit, nu * nu);
}

double approximate_inverse(double r) {
  return 2.0 * r + r * r * r + 5.0 / 6.0 * std::pow(r, 5);
}

double find_branch_point() {
  // The two branches cross once on (0.3, 0.4).
  double lo = 0.3;
  double hi = 0.4;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (approximate_inverse(mid) < 0.5 / (1.0 - mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const double kSmallResultant = find_branch_point();

double bessel_i0(double kappa) {
  check_argument(kappa, "bessel_i0");
  if (kappa <= kSeriesLimit) {
    return normalized_series(0.0, kappa, kSeriesTerms);
  }
  return std::exp(log_bessel_i(0.0, kappa));
}

double bessel_i1(double kappa) {
  check_argument(kappa, "bessel_i1");
  if (kappa <= kSeriesLimit) {
    return 0.5 * kappa * normalized_series(1.0, kappa, kSeriesTerms);
  }
  return std::exp(log_bessel_i(1.0, kappa));
}

double log_bessel_i(double nu, double x) {
  check_argument(nu, "log_bessel_i order");
  check_argument(x, "log_bessel_i");
  if (x == 0.0) {
    return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (use_asymptotic(nu, x)) {
    return x - 0.5 * std::log(kTwoPi * x) + std::log(asymptotic_sum(nu, x));
  }
  const int terms = std::max(kSeriesTerms, static_cast<int>(4.0 * x));
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) +
         std::log(normalized_series(nu, x, terms));
}

double bessel_ratio_a(double kappa) {
  check_argument(kappa, "bessel_ratio_a");
  if (kappa == 0.0) {
    return 0.0;
  }
  if (kappa <= kSeriesLimit) {
    return 0.5 * kappa * normalized_series(1.0, kappa, kSeriesTerms) /
           normalized_series(0.0, kappa, kSeriesTerms);
  }
  return asymptotic_sum(1.0, kappa) / asymptotic_sum(0.0, kappa);
}

double bessel_ratio_a_derivative(double kappa) {
  if (kappa == 0.0) {
    return 0.5;
  }
  const double a = bessel_ratio_a(kappa);
  return 1.0 - a / kappa - a * a;
}

KappaEstimate inverse_bessel_ratio(double r_bar) {
  if (!(r_bar >= 0.0)) {
    throw std::domain_error("inverse_bessel_ratio: r_bar must be non-negative");
  }
  if (r_bar >= 1.0) {
    return {kKappaMax, true};
  }
  const double kappa =
      r_bar < kSmallResultant ? approximate_inverse(r_bar) : 0.5 / (1.0 - r_bar);
  if (kappa >= kKappaMax) {
    return {kKappaMax, true};
  }
  return {kappa, false};
}

KappaEstimate solve_bessel_ratio(double r_bar) {
  if (!(r_bar >= 0.0)) {
    throw std::domain_error("solve_bessel_ratio: r_bar must be non-negative");
  }
  if (r_bar == 0.0) {
    return {0.0, false};
  }
  if (r_bar >= 1.0 || r_bar >= bessel_ratio_a(kKappaMax)) {
    return {kKappaMax, true};
  }
  double lo = 0.0;
  double hi = kKappaMax;
  double kappa = std::clamp(inverse_bessel_ratio(r_bar).kappa, 1e-300, kKappaMax);
  for (int it = 0; it < 200; ++it) {
    const double f = bessel_ratio_a(kappa) - r_bar;
    if (f == 0.0) {
      break;
    }
    (f > 0.0 ? hi : lo) = kappa;
    double next = kappa - f / bessel_ratio_a_derivative(kappa);
    if (!(next > lo && next < hi)) {
      next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    }
    const bool done = std::abs(next - kappa) <= 4.0 * std::numeric_limits<double>::epsilon() * next;
    kappa = next;
    if (done) {
      break;
    }
  }
  return {kappa, false};
}

}  // namespace dirmap
