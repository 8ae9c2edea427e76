#pragma once

// Reference computations for the tests. Everything here uses adaptive
// Gauss-Kronrod quadrature or direct arithmetic, not the library's Simpson
// grids or log-space kernels.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

inline double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14,
                                                                      &err);
}

// int prod_j phi(z_j - mu) dUnif[a, b](mu), split at the block mean so the
// peak is never straddled by a single panel.
inline double block_marginal(const std::vector<double>& zs, double a, double b) {
  auto f = [&](double mu) {
    double p = 1.0;
    for (double z : zs) p *= phi(z - mu);
    return p / (b - a);
  };
  double zbar = 0.0;
  for (double z : zs) zbar += z;
  zbar /= static_cast<double>(zs.size());
  if (zbar <= a || zbar >= b) return integrate(f, a, b);
  return integrate(f, a, zbar) + integrate(f, zbar, b);
}

// E[mu] for mu ~ N(u, s2) truncated to [a, b].
inline double tn_mean(double u, double s2, double a, double b) {
  const double s = std::sqrt(s2);
  auto w = [&](double x) { return phi((x - u) / s); };
  double lo = a, hi = b;
  // Keep the quadrature window where the density is not negligible.
  lo = std::max(lo, u - 40.0 * s);
  hi = std::min(hi, u + 40.0 * s);
  if (lo >= hi) return u < a ? a : b;
  const double num = integrate([&](double x) { return x * w(x); }, lo, hi);
  const double den = integrate(w, lo, hi);
  return num / den;
}

// Posterior mean under a finite prior, by plain summation.
inline double two_atom_posterior_mean(double a0, double w0, double a1, double w1, double z) {
  const double p0 = w0 * phi(z - a0);
  const double p1 = w1 * phi(z - a1);
  return (a0 * p0 + a1 * p1) / (p0 + p1);
}

}  // namespace oracle
