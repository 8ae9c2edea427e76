#pragma once

#include "ebnp/model.hpp"

namespace ebnp {

// Posterior mean of mu given Z = z under mu ~ g, Z | mu ~ N(mu, 1).
// Evaluated as a weighted-atom ratio in log space; never NaN.
double bayes_rule(const DiscreteMixingMeasure& g, double z);

// z + f_g'(z) / f_g(z). Agrees with bayes_rule wherever f_g(z) is
// representable.
double tweedie_rule(const DiscreteMixingMeasure& g, double z);

// z + f_g'(z) / max(f_g(z), rho).
double regularized_rule(const DiscreteMixingMeasure& g, double z, double rho);

// Applies bayes_rule(g, .) to every coordinate.
MeanVector separable_apply(const DiscreteMixingMeasure& g, const Dataset& data);

// One atom per distinct value (exact comparison), weight = multiplicity / n.
DiscreteMixingMeasure empirical_measure(const MeanVector& mu);

// Separable oracle: the Bayes rule under the empirical distribution of the
// true means.
MeanVector oracle_rule(const MeanVector& mu, const Dataset& data);

// (1 - (n - 2)/|Z|^2) Z, optionally with the factor clamped at 0.
// The plain variant throws std::domain_error when |Z|^2 = 0.
MeanVector james_stein(const Dataset& data, bool positive_part);

}  // namespace ebnp
