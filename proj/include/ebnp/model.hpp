#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebnp/random.hpp"

namespace ebnp {

// A finitely supported probability measure on the real line. Used for priors,
// fitted mixing measures and empirical distributions of mean vectors.
class DiscreteMixingMeasure {
 public:
  // Throws std::invalid_argument unless the lists have equal nonzero length,
  // all atoms are finite, weights are nonnegative and sum to 1 within 1e-12.
  // With a support bound M every atom must lie in [-M, M].
  DiscreteMixingMeasure(std::vector<double> atoms, std::vector<double> weights,
                        std::optional<double> support_bound = std::nullopt);

  static DiscreteMixingMeasure point_mass(double atom);

  // Drops weights below `threshold` and rescales the rest. Throws if nothing
  // survives.
  static DiscreteMixingMeasure pruned(std::vector<double> atoms,
                                      std::vector<double> weights,
                                      double threshold);

  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }

  double min_atom() const;
  double max_atom() const;
  double max_abs_atom() const;

  // Total weight of atoms within `radius` of `center`.
  double mass_near(double center, double radius) const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

struct UniformBase {
  double lower = -10.0;
  double upper = 10.0;

  // Throws std::invalid_argument unless lower < upper, both finite.
  void validate() const;
  double width() const { return upper - lower; }
};

// Unit-variance Gaussian observations.
class Dataset {
 public:
  explicit Dataset(std::vector<double> z);
  std::span<const double> z() const { return z_; }
  std::size_t size() const { return z_.size(); }
  double operator[](std::size_t i) const { return z_[i]; }

 private:
  std::vector<double> z_;
};

using MeanVector = std::vector<double>;

struct TruncatedNormalParams {
  double location = 0.0;
  double scale2 = 1.0;
  double lower = -10.0;
  double upper = 10.0;

  void validate() const;
  double scale() const;
};

// f(z) = [Phi((b - z)/sigma) - Phi((a - z)/sigma)] / (b - a).
double uniform_base_marginal(double z, const UniformBase& base,
                             double sigma = 1.0);
double log_uniform_base_marginal(double z, const UniformBase& base,
                                 double sigma = 1.0);

// Marginal likelihood of a block of unit-variance observations sharing one
// mean drawn from the uniform base.
double block_marginal_likelihood(std::span<const double> zs,
                                 const UniformBase& base);
double log_block_marginal_likelihood(std::span<const double> zs,
                                     const UniformBase& base);
// Same, from sufficient statistics: k, sum z, sum z^2.
double log_block_marginal_likelihood(std::size_t k, double sum, double sum_sq,
                                     const UniformBase& base);

double truncated_normal_mean(const TruncatedNormalParams& p);
double truncated_normal_pdf(const TruncatedNormalParams& p, double x);
double truncated_normal_cdf(const TruncatedNormalParams& p, double x);
// Inverse-CDF draw; bounded work per call in every tail regime.
double truncated_normal_sample(const TruncatedNormalParams& p, Rng& rng);

// Unit-variance Gaussian location mixture f_G = G * N(0, 1).
class GaussianMixtureDensity {
 public:
  explicit GaussianMixtureDensity(DiscreteMixingMeasure g);

  const DiscreteMixingMeasure& measure() const { return g_; }

  double density(double z) const;
  double log_density(double z) const;
  double derivative(double z) const;
  // f'(z)/f(z), computed from jointly rescaled sums so it survives underflow
  // of f itself.
  double score(double z) const;

 private:
  DiscreteMixingMeasure g_;
  std::vector<double> log_weights_;
};

// CSV I/O. Mixing measures use header `atom,weight`; datasets header `z`.
DiscreteMixingMeasure read_measure_csv(std::istream& in);
void write_measure_csv(std::ostream& out, const DiscreteMixingMeasure& g);
Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(std::ostream& out, const Dataset& data);

DiscreteMixingMeasure read_measure_csv_file(const std::string& path);
Dataset read_dataset_csv_file(const std::string& path);

// Shortest round-trip decimal rendering (17 significant digits).
std::string format_double(double x);

}  // namespace ebnp
