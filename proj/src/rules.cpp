#include "ebnp/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ebnp {

double bayes_rule(const DiscreteMixingMeasure& g, double z) {
  const auto atoms = g.atoms();
  const auto weights = g.weights();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    const double d = z - atoms[k];
    m = std::max(m, std::log(weights[k]) - 0.5 * d * d);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    const double d = z - atoms[k];
    const double e = std::exp(std::log(weights[k]) - 0.5 * d * d - m);
    num += e * atoms[k];
    den += e;
  }
  return std::clamp(num / den, g.min_atom(), g.max_atom());
}

double tweedie_rule(const DiscreteMixingMeasure& g, double z) {
  const GaussianMixtureDensity f(g);
  const double dens = f.density(z);
  if (dens > 0.0) return z + f.derivative(z) / dens;
  // f underflows entirely; fall back to the rescaled score.
  return z + f.score(z);
}

double regularized_rule(const DiscreteMixingMeasure& g, double z, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("regularized_rule: rho <= 0");
  const GaussianMixtureDensity f(g);
  return z + f.derivative(z) / std::max(f.density(z), rho);
}

MeanVector separable_apply(const DiscreteMixingMeasure& g,
                           const Dataset& data) {
  MeanVector out;
  out.reserve(data.size());
  for (double z : data.z()) out.push_back(bayes_rule(g, z));
  return out;
}

DiscreteMixingMeasure empirical_measure(const MeanVector& mu) {
  if (mu.empty()) throw std::invalid_argument("empirical_measure: empty input");
  std::map<double, std::size_t> counts;
  for (double v : mu) ++counts[v];
  std::vector<double> atoms;
  std::vector<double> weights;
  const double n = static_cast<double>(mu.size());
  for (const auto& [atom, c] : counts) {
    atoms.push_back(atom);
    weights.push_back(static_cast<double>(c) / n);
  }
  return DiscreteMixingMeasure(std::move(atoms), std::move(weights));
}

MeanVector oracle_rule(const MeanVector& mu, const Dataset& data) {
  if (mu.size() != data.size()) {
    throw std::invalid_argument("oracle_rule: mean vector and data differ in length");
  }
  return separable_apply(empirical_measure(mu), data);
}

MeanVector james_stein(const Dataset& data, bool positive_part) {
  double norm2 = 0.0;
  for (double z : data.z()) norm2 += z * z;
  const double n = static_cast<double>(data.size());
  MeanVector out(data.size(), 0.0);
  if (norm2 == 0.0) {
    if (positive_part) return out;
    throw std::domain_error("james_stein: |Z|^2 = 0, shrinkage factor undefined");
  }
  double factor = 1.0 - (n - 2.0) / norm2;
  if (positive_part) factor = std::max(factor, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = factor * data[i];
  return out;
}

}  // namespace ebnp
