#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ebnp/model.hpp"
#include "ebnp/random.hpp"

namespace ebnp {

// Hyperparameters of the DP mixture: mu_i | G ~ G, G ~ DP(alpha, H) with
// H = Unif[base], alpha ~ Gamma(shape, scale).
struct DpConfig {
  UniformBase base{-10.0, 10.0};
  double alpha_shape = 0.01;
  double alpha_scale = 100.0;
  // Holds alpha constant and skips its resampling step when set.
  std::optional<double> alpha_fixed;
  std::size_t burn_in_sweeps = 2000;
  std::size_t sample_sweeps = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  double alpha_rate() const { return 1.0 / alpha_scale; }
  double alpha_prior_mean() const { return alpha_shape * alpha_scale; }
};

// Partition of the observations into clusters, one location per cluster, and
// the current concentration. Cluster ids increase monotonically and are never
// reused.
class GibbsState {
 public:
  // Every observation in one cluster located at mean(z) clamped to the base.
  static GibbsState initial(const Dataset& data, const DpConfig& cfg);

  // Explicit construction; labels are arbitrary integers. Throws if any label
  // lacks a location or a location has no members. Use audit() to check the
  // locations against a base.
  static GibbsState from_labels(const std::vector<std::uint64_t>& labels,
                                const std::map<std::uint64_t, double>& locations,
                                double alpha, std::uint64_t seed);

  std::size_t size() const { return slot_of_.size(); }
  std::uint64_t cluster_of(std::size_t i) const;
  std::map<std::uint64_t, double> cluster_locations() const;
  std::map<std::uint64_t, std::size_t> cluster_sizes() const;
  std::size_t occupied_clusters() const;
  double alpha() const { return alpha_; }

  // Groups of observation indices sharing a cluster, each sorted, ordered by
  // smallest member. Independent of the labels.
  std::vector<std::vector<std::size_t>> partition() const;

  // Throws std::logic_error on broken bookkeeping: sizes not summing to n,
  // orphan or missing locations, locations outside [lower, upper].
  void audit(const UniformBase& base) const;

 private:
  friend class DpSampler;

  struct Cluster {
    std::uint64_t id = 0;
    std::size_t size = 0;
    double sum = 0.0;
    double location = 0.0;
  };

  std::vector<Cluster> clusters_;
  std::vector<std::size_t> slot_of_;
  std::uint64_t next_id_ = 0;
  double alpha_ = 1.0;
  Rng rng_;
};

struct PosteriorSummary {
  MeanVector mean;
  std::size_t sweeps_used = 0;
  double alpha_mean = 0.0;
  double alpha_variance = 0.0;
  double occupied_clusters_mean = 0.0;
};

// Collapsed-over-G Gibbs sampler with explicit cluster locations: conjugate
// reassignment against the uniform base, truncated-normal location updates and
// the auxiliary-variable concentration update.
class DpSampler {
 public:
  DpSampler(const Dataset& data, const DpConfig& cfg);

  void sweep(GibbsState& state) const;

  // Conditional posterior mean of each observation's location given the
  // current partition.
  void conditional_means(const GibbsState& state, std::vector<double>& out) const;

 private:
  void reassign(GibbsState& state, std::size_t i) const;
  void resample_locations(GibbsState& state) const;
  static void compact(GibbsState& state);

  const Dataset& data_;
  DpConfig cfg_;
  std::vector<double> log_new_cluster_;
};

// One full sweep; see DpSampler.
GibbsState sweep(GibbsState state, const Dataset& data, const DpConfig& cfg);

// Auxiliary-variable draw of alpha given k occupied clusters among n points.
double resample_alpha(double alpha, std::size_t k_occupied, std::size_t n,
                      const DpConfig& cfg, Rng& rng);

// Rao-Blackwellized posterior mean of the location vector.
PosteriorSummary estimate(const Dataset& data, const DpConfig& cfg);

}  // namespace ebnp
