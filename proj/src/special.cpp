#include "ebnp/special.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ebnp::special {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440084436210485;
constexpr double kSqrt2 = 1.41421356237309504880168872420970;

// Below this point erfc loses relative precision long before it underflows,
// so log Phi switches to the asymptotic expansion.
constexpr double kTailSwitch = -20.0;

// log Phi(x) for x <= kTailSwitch:
// Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
double log_cdf_asymptotic(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv_x2;
    sum += term;
  }
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(sum);
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double normal_log_cdf(double x) {
  if (x > 5.0) return std::log1p(-normal_cdf(-x));
  if (x > kTailSwitch) return std::log(normal_cdf(x));
  return log_cdf_asymptotic(x);
}

double normal_interval(double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo >= 0.0) return normal_interval(-hi, -lo);
  if (hi <= 0.0) {
    // Both ends in the lower tail; erfc keeps relative accuracy here.
    return normal_cdf(hi) - normal_cdf(lo);
  }
  // Straddles zero: erf values have opposite signs, no cancellation.
  return 0.5 * (std::erf(hi * kSqrt1_2) - std::erf(lo * kSqrt1_2));
}

double normal_log_interval(double lo, double hi) {
  if (!(lo < hi)) return -std::numeric_limits<double>::infinity();
  if (lo >= 0.0) return normal_log_interval(-hi, -lo);
  if (hi <= 0.0) {
    const double lhi = normal_log_cdf(hi);
    const double llo = normal_log_cdf(lo);
    return lhi + std::log(-std::expm1(llo - lhi));
  }
  return std::log(normal_interval(lo, hi));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  }
  if (p > 0.5) return -normal_quantile(1.0 - p);
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

double normal_quantile_log(double log_p) {
  if (!(log_p < 0.0)) {
    throw std::invalid_argument("normal_quantile_log: log_p must be negative");
  }
  if (log_p > -700.0) {
    const double p = std::exp(log_p);
    if (p < 1.0) {
      // Near p = 1 the complement is computed from log_p directly.
      if (p > 0.5) return -normal_quantile(-std::expm1(log_p));
      return normal_quantile(p);
    }
    return -normal_quantile(-std::expm1(log_p));
  }
  // Deep lower tail: start from the leading asymptotic term and polish with
  // Newton on log Phi(x) - log_p, whose derivative is phi(x)/Phi(x).
  double x = -std::sqrt(-2.0 * log_p);
  for (int iter = 0; iter < 50; ++iter) {
    const double lc = normal_log_cdf(x);
    const double step = (lc - log_p) / std::exp(normal_log_pdf(x) - lc);
    x -= step;
    if (std::abs(step) <= 1e-15 * std::abs(x)) break;
  }
  return x;
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace ebnp::special
