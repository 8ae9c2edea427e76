#pragma once

#include <cstddef>
#include <functional>

#include "ebnp/model.hpp"

namespace ebnp {

inline constexpr double kDefaultQuadratureStep = 0.005;

// Composite Simpson rule on a fixed, evenly spaced grid. The interval count
// is the smallest even number giving a step no larger than the requested one.
class SimpsonGrid {
 public:
  SimpsonGrid(double lower, double upper, double max_step = kDefaultQuadratureStep);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double step() const { return step_; }
  std::size_t intervals() const { return intervals_; }
  std::size_t num_points() const { return intervals_ + 1; }

  double point(std::size_t k) const;
  double weight(std::size_t k) const;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k <= intervals_; ++k) s += weight(k) * f(point(k));
    return s;
  }

 private:
  double lower_;
  double upper_;
  std::size_t intervals_;
  double step_;
};

// [-(M + 10), M + 10] with M the largest |atom| of either measure.
SimpsonGrid divergence_grid(const DiscreteMixingMeasure& g,
                            const DiscreteMixingMeasure& q,
                            double step = kDefaultQuadratureStep);

// H(f_g, f_q) with H^2 = 1/2 * int (sqrt f_g - sqrt f_q)^2; lies in [0, 1].
double hellinger(const DiscreteMixingMeasure& g, const DiscreteMixingMeasure& q,
                 double step = kDefaultQuadratureStep);

// int f_g log(f_g / f_q).
double kl(const DiscreteMixingMeasure& g, const DiscreteMixingMeasure& q,
          double step = kDefaultQuadratureStep);

// int (f_g'/f_g - f_q'/f_q)^2 f_g.
double fisher_divergence(const DiscreteMixingMeasure& g,
                         const DiscreteMixingMeasure& q,
                         double step = kDefaultQuadratureStep);

// int (bayes_rule(g, z) - bayes_rule(q, z))^2 f_g(z) dz. Equal to the Fisher
// divergence; evaluated through the posterior means instead of the scores.
double posterior_mean_discrepancy(const DiscreteMixingMeasure& g,
                                  const DiscreteMixingMeasure& q,
                                  double step = kDefaultQuadratureStep);

// f_mu(z) = (1/n) sum_i phi(z - mu_i).
GaussianMixtureDensity compound_marginal(const MeanVector& mu);

using ScalarRule = std::function<double(double)>;

// (1/n) sum_i int (t(z) - mu_i)^2 phi(z - mu_i) dz.
double compound_risk(const ScalarRule& t, const MeanVector& mu,
                     const SimpsonGrid& grid);

// int int (t(z) - nu)^2 phi(z - nu) dz dG(nu).
double bayes_risk(const ScalarRule& t, const DiscreteMixingMeasure& g,
                  const SimpsonGrid& grid);

// Grid covering [min mu - 12, max mu + 12]; used for the risk integrals.
SimpsonGrid risk_grid(const MeanVector& mu, double step = kDefaultQuadratureStep);

}  // namespace ebnp
