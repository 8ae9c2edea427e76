#include "ebnp/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ebnp/rules.hpp"
#include "ebnp/special.hpp"

namespace ebnp {

namespace {

constexpr double kDensityFloor = 1e-300;
const double kLogDensityFloor = std::log(kDensityFloor);

}  // namespace

SimpsonGrid::SimpsonGrid(double lower, double upper, double max_step)
    : lower_(lower), upper_(upper) {
  if (!(lower < upper) || !(max_step > 0.0)) {
    throw std::invalid_argument("SimpsonGrid: need lower < upper and step > 0");
  }
  auto n = static_cast<std::size_t>(std::ceil((upper - lower) / max_step - 1e-9));
  n = std::max<std::size_t>(n, 2);
  if (n % 2 == 1) ++n;
  intervals_ = n;
  step_ = (upper - lower) / static_cast<double>(n);
}

double SimpsonGrid::point(std::size_t k) const {
  if (k == intervals_) return upper_;
  return lower_ + static_cast<double>(k) * step_;
}

double SimpsonGrid::weight(std::size_t k) const {
  const double third = step_ / 3.0;
  if (k == 0 || k == intervals_) return third;
  return (k % 2 == 1) ? 4.0 * third : 2.0 * third;
}

SimpsonGrid divergence_grid(const DiscreteMixingMeasure& g,
                            const DiscreteMixingMeasure& q, double step) {
  const double m = std::max(g.max_abs_atom(), q.max_abs_atom());
  return SimpsonGrid(-(m + 10.0), m + 10.0, step);
}

double hellinger(const DiscreteMixingMeasure& g, const DiscreteMixingMeasure& q,
                 double step) {
  const GaussianMixtureDensity fg(g);
  const GaussianMixtureDensity fq(q);
  const double h2 = 0.5 * divergence_grid(g, q, step).integrate([&](double z) {
    const double d = std::sqrt(fg.density(z)) - std::sqrt(fq.density(z));
    return d * d;
  });
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

double kl(const DiscreteMixingMeasure& g, const DiscreteMixingMeasure& q,
          double step) {
  const GaussianMixtureDensity fg(g);
  const GaussianMixtureDensity fq(q);
  const double v = divergence_grid(g, q, step).integrate([&](double z) {
    const double lg = std::max(fg.log_density(z), kLogDensityFloor);
    const double lq = std::max(fq.log_density(z), kLogDensityFloor);
    return std::exp(lg) * (lg - lq);
  });
  return std::max(v, 0.0);
}

double fisher_divergence(const DiscreteMixingMeasure& g,
                         const DiscreteMixingMeasure& q, double step) {
  const GaussianMixtureDensity fg(g);
  const GaussianMixtureDensity fq(q);
  return divergence_grid(g, q, step).integrate([&](double z) {
    const double d = fg.score(z) - fq.score(z);
    return d * d * fg.density(z);
  });
}

double posterior_mean_discrepancy(const DiscreteMixingMeasure& g,
                                  const DiscreteMixingMeasure& q, double step) {
  const GaussianMixtureDensity fg(g);
  return divergence_grid(g, q, step).integrate([&](double z) {
    const double d = bayes_rule(g, z) - bayes_rule(q, z);
    return d * d * fg.density(z);
  });
}

GaussianMixtureDensity compound_marginal(const MeanVector& mu) {
  return GaussianMixtureDensity(empirical_measure(mu));
}

SimpsonGrid risk_grid(const MeanVector& mu, double step) {
  if (mu.empty()) throw std::invalid_argument("risk_grid: empty mean vector");
  const auto [lo, hi] = std::minmax_element(mu.begin(), mu.end());
  return SimpsonGrid(*lo - 12.0, *hi + 12.0, step);
}

double compound_risk(const ScalarRule& t, const MeanVector& mu,
                     const SimpsonGrid& grid) {
  double total = 0.0;
  for (double m : mu) {
    total += grid.integrate([&](double z) {
      const double d = t(z) - m;
      return d * d * special::normal_pdf(z - m);
    });
  }
  return total / static_cast<double>(mu.size());
}

double bayes_risk(const ScalarRule& t, const DiscreteMixingMeasure& g,
                  const SimpsonGrid& grid) {
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double nu = g.atoms()[k];
    total += g.weights()[k] * grid.integrate([&](double z) {
      const double d = t(z) - nu;
      return d * d * special::normal_pdf(z - nu);
    });
  }
  return total;
}

}  // namespace ebnp
