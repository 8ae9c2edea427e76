#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ebnp/model.hpp"

namespace ebnp {

struct NpmleConfig {
  std::size_t grid_atoms = 300;
  // Unset bounds default to [min z - 0.5, max z + 0.5].
  std::optional<double> grid_lower;
  std::optional<double> grid_upper;
  // Restricts the grid to [-M, M].
  std::optional<double> support_bound;
  std::size_t max_em_iters = 50000;
  // Relative change in mean log-likelihood between accelerated iterations.
  // Convergence also requires max_j D(g_j) <= 1 + kkt_tol on the grid.
  double obj_tol = 1e-9;
  double kkt_tol = 1e-3;
  // After EM stalls, finish with active-set Newton steps on the grid weights
  // until max_j D(g_j) - 1 <= obj_tol. Disable for plain (accelerated) EM.
  bool newton_polish = true;

  void validate() const;
};

// First-order optimality check: D(mu) = (1/n) sum_i phi(z_i - mu) / f(z_i)
// must not exceed 1 anywhere.
struct KktCertificate {
  double sup_gradient = 0.0;
  double tol = 0.0;
  bool satisfied = false;
};

struct NpmleFit {
  DiscreteMixingMeasure measure;
  KktCertificate certificate;
  std::size_t iterations = 0;
  bool converged = false;
  // (1/n) sum_i log f(z_i) of the returned measure.
  double mean_log_likelihood = 0.0;
  // Objective after every accepted update, starting from the initial weights.
  std::vector<double> objective_trace;
};

// Grid used by `fit` for this data and configuration.
std::vector<double> npmle_grid(const Dataset& data, const NpmleConfig& cfg);

// Maximizes the mixture log-likelihood over weights on a fixed grid:
// multiplicative EM updates (SQUAREM-extrapolated, monotone), then an optional
// active-set Newton polish. Weights below 1e-12 are pruned. A fit that fails to certify is still returned with
// certificate.satisfied = false.
NpmleFit fit(const Dataset& data, const NpmleConfig& cfg = {});

// Same, starting from caller-supplied grid weights (normalized internally).
NpmleFit fit_from(const Dataset& data, const NpmleConfig& cfg,
                  std::vector<double> initial_weights);

// Gradient sup over the grid and its 10x refinement, for any measure.
KktCertificate kkt_certificate(const Dataset& data, const DiscreteMixingMeasure& g,
                               double lower, double upper, std::size_t grid_atoms,
                               double tol);

// Lindsay gradient D(mu) for a measure.
double mixture_gradient(const Dataset& data, const DiscreteMixingMeasure& g, double mu);

double mean_log_likelihood(const Dataset& data, const DiscreteMixingMeasure& g);

// Plug-in empirical Bayes rule: bayes_rule(fitted measure, z_i).
MeanVector plugin_rule(const Dataset& data, const NpmleConfig& cfg = {});

}  // namespace ebnp
