#include "ebnp/dpgibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ebnp/special.hpp"

namespace ebnp {

void DpConfig::validate() const {
  base.validate();
  if (!(alpha_shape > 0.0) || !(alpha_scale > 0.0)) {
    throw std::invalid_argument("DpConfig: alpha shape and scale must be positive");
  }
  if (alpha_fixed && !(*alpha_fixed > 0.0)) {
    throw std::invalid_argument("DpConfig: fixed alpha must be positive");
  }
  if (sample_sweeps < 1) {
    throw std::invalid_argument("DpConfig: need at least one sample sweep");
  }
}

// ---------------------------------------------------------------------------
// GibbsState

GibbsState GibbsState::initial(const Dataset& data, const DpConfig& cfg) {
  cfg.validate();
  GibbsState s;
  const double n = static_cast<double>(data.size());
  const double sum = std::accumulate(data.z().begin(), data.z().end(), 0.0);
  s.clusters_.push_back(Cluster{0, data.size(), sum,
                                std::clamp(sum / n, cfg.base.lower, cfg.base.upper)});
  s.slot_of_.assign(data.size(), 0);
  s.next_id_ = 1;
  s.alpha_ = cfg.alpha_fixed.value_or(cfg.alpha_prior_mean());
  s.rng_.seed(cfg.seed);
  return s;
}

GibbsState GibbsState::from_labels(const std::vector<std::uint64_t>& labels,
                                   const std::map<std::uint64_t, double>& locations,
                                   double alpha, std::uint64_t seed) {
  if (labels.empty()) throw std::invalid_argument("GibbsState: no observations");
  if (!(alpha > 0.0)) throw std::invalid_argument("GibbsState: alpha must be positive");
  GibbsState s;
  std::map<std::uint64_t, std::size_t> slot_of_label;
  for (std::uint64_t label : labels) {
    if (slot_of_label.count(label)) continue;
    const auto it = locations.find(label);
    if (it == locations.end()) {
      throw std::invalid_argument("GibbsState: label without a location");
    }
    slot_of_label[label] = s.clusters_.size();
    s.clusters_.push_back(Cluster{label, 0, 0.0, it->second});
    s.next_id_ = std::max(s.next_id_, label + 1);
  }
  if (locations.size() != slot_of_label.size()) {
    throw std::invalid_argument("GibbsState: location without any member");
  }
  for (std::uint64_t label : labels) {
    const std::size_t slot = slot_of_label[label];
    s.slot_of_.push_back(slot);
    ++s.clusters_[slot].size;
  }
  s.alpha_ = alpha;
  s.rng_.seed(seed);
  return s;
}

std::uint64_t GibbsState::cluster_of(std::size_t i) const {
  return clusters_.at(slot_of_.at(i)).id;
}

std::map<std::uint64_t, double> GibbsState::cluster_locations() const {
  std::map<std::uint64_t, double> out;
  for (const auto& c : clusters_) {
    if (c.size > 0) out[c.id] = c.location;
  }
  return out;
}

std::map<std::uint64_t, std::size_t> GibbsState::cluster_sizes() const {
  std::map<std::uint64_t, std::size_t> out;
  for (const auto& c : clusters_) {
    if (c.size > 0) out[c.id] = c.size;
  }
  return out;
}

std::size_t GibbsState::occupied_clusters() const {
  return static_cast<std::size_t>(std::count_if(
      clusters_.begin(), clusters_.end(), [](const Cluster& c) { return c.size > 0; }));
}

std::vector<std::vector<std::size_t>> GibbsState::partition() const {
  std::vector<std::vector<std::size_t>> by_slot(clusters_.size());
  for (std::size_t i = 0; i < slot_of_.size(); ++i) by_slot[slot_of_[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& b : by_slot) {
    if (!b.empty()) out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void GibbsState::audit(const UniformBase& base) const {
  std::vector<std::size_t> counted(clusters_.size(), 0);
  for (std::size_t slot : slot_of_) {
    if (slot >= clusters_.size()) throw std::logic_error("audit: dangling cluster slot");
    ++counted[slot];
  }
  std::size_t total = 0;
  for (std::size_t s = 0; s < clusters_.size(); ++s) {
    const auto& c = clusters_[s];
    if (counted[s] != c.size) throw std::logic_error("audit: cluster size mismatch");
    if (c.size == 0) throw std::logic_error("audit: orphan cluster location");
    if (!(c.location >= base.lower && c.location <= base.upper)) {
      throw std::logic_error("audit: cluster location outside the base interval");
    }
    total += c.size;
  }
  if (total != slot_of_.size()) throw std::logic_error("audit: sizes do not sum to n");
  if (!(alpha_ > 0.0)) throw std::logic_error("audit: non-positive alpha");
}

// ---------------------------------------------------------------------------
// Sampler

DpSampler::DpSampler(const Dataset& data, const DpConfig& cfg)
    : data_(data), cfg_(cfg) {
  cfg_.validate();
  log_new_cluster_.reserve(data.size());
  for (double z : data.z()) {
    log_new_cluster_.push_back(log_uniform_base_marginal(z, cfg_.base));
  }
}

void DpSampler::reassign(GibbsState& state, std::size_t i) const {
  auto& clusters = state.clusters_;
  const double z = data_[i];
  const std::size_t old_slot = state.slot_of_[i];
  --clusters[old_slot].size;

  // Gumbel-max over log weights: n_c * phi(z - mu_c) for occupied clusters and
  // alpha * f_H(z) for a fresh one.
  std::size_t best_slot = clusters.size();
  double best = std::log(state.alpha_) + log_new_cluster_[i] + standard_gumbel(state.rng_);
  for (std::size_t s = 0; s < clusters.size(); ++s) {
    const auto& c = clusters[s];
    if (c.size == 0) continue;
    const double d = z - c.location;
    const double lw = std::log(static_cast<double>(c.size)) - 0.5 * d * d -
                      special::kLogSqrt2Pi + standard_gumbel(state.rng_);
    if (lw > best) {
      best = lw;
      best_slot = s;
    }
  }

  if (best_slot == clusters.size()) {
    const double loc = truncated_normal_sample(
        TruncatedNormalParams{z, 1.0, cfg_.base.lower, cfg_.base.upper}, state.rng_);
    // Reuse an emptied slot when one exists; its id is retired.
    std::size_t slot = clusters.size();
    if (clusters[old_slot].size == 0) {
      slot = old_slot;
    } else {
      for (std::size_t s = 0; s < clusters.size(); ++s) {
        if (clusters[s].size == 0) {
          slot = s;
          break;
        }
      }
    }
    if (slot == clusters.size()) clusters.emplace_back();
    clusters[slot] = GibbsState::Cluster{state.next_id_++, 0, 0.0, loc};
    best_slot = slot;
  }
  ++clusters[best_slot].size;
  state.slot_of_[i] = best_slot;
}

void DpSampler::compact(GibbsState& state) {
  auto& clusters = state.clusters_;
  std::vector<std::size_t> remap(clusters.size(), 0);
  std::size_t next = 0;
  for (std::size_t s = 0; s < clusters.size(); ++s) {
    if (clusters[s].size == 0) continue;
    remap[s] = next;
    clusters[next++] = clusters[s];
  }
  clusters.resize(next);
  for (auto& slot : state.slot_of_) slot = remap[slot];
}

void DpSampler::resample_locations(GibbsState& state) const {
  auto& clusters = state.clusters_;
  for (auto& c : clusters) c.sum = 0.0;
  for (std::size_t i = 0; i < state.slot_of_.size(); ++i) {
    clusters[state.slot_of_[i]].sum += data_[i];
  }
  for (auto& c : clusters) {
    const double k = static_cast<double>(c.size);
    c.location = truncated_normal_sample(
        TruncatedNormalParams{c.sum / k, 1.0 / k, cfg_.base.lower, cfg_.base.upper},
        state.rng_);
  }
}

void DpSampler::sweep(GibbsState& state) const {
  if (state.size() != data_.size()) {
    throw std::invalid_argument("sweep: state and data differ in length");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) reassign(state, i);
  compact(state);
  resample_locations(state);
  if (!cfg_.alpha_fixed) {
    state.alpha_ = resample_alpha(state.alpha_, state.clusters_.size(),
                                  data_.size(), cfg_, state.rng_);
  }
#ifndef NDEBUG
  state.audit(cfg_.base);
#endif
}

void DpSampler::conditional_means(const GibbsState& state,
                                  std::vector<double>& out) const {
  std::vector<double> cluster_mean(state.clusters_.size());
  for (std::size_t s = 0; s < state.clusters_.size(); ++s) {
    const auto& c = state.clusters_[s];
    const double k = static_cast<double>(c.size);
    cluster_mean[s] = truncated_normal_mean(
        TruncatedNormalParams{c.sum / k, 1.0 / k, cfg_.base.lower, cfg_.base.upper});
  }
  out.resize(state.slot_of_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cluster_mean[state.slot_of_[i]];
}

GibbsState sweep(GibbsState state, const Dataset& data, const DpConfig& cfg) {
  DpSampler(data, cfg).sweep(state);
  return state;
}

double resample_alpha(double alpha, std::size_t k_occupied, std::size_t n,
                      const DpConfig& cfg, Rng& rng) {
  if (k_occupied < 1 || k_occupied > n) {
    throw std::invalid_argument("resample_alpha: need 1 <= k <= n");
  }
  const double a0 = cfg.alpha_shape;
  const double k = static_cast<double>(k_occupied);
  const double nd = static_cast<double>(n);
  const double eta = beta_draw(rng, alpha + 1.0, nd);
  const double rate = cfg.alpha_rate() - std::log(eta);
  const double low_shape = a0 + k - 1.0;
  double w = 1.0;
  if (low_shape > 0.0) {
    const double odds = low_shape / (nd * rate);
    w = odds / (1.0 + odds);
  }
  const double shape = uniform_open(rng) < w ? a0 + k : low_shape;
  double draw = gamma_draw(rng, shape, rate);
  // Shapes near 0.01 can underflow to exactly zero.
  if (!(draw > 0.0)) draw = std::numeric_limits<double>::min();
  return draw;
}

PosteriorSummary estimate(const Dataset& data, const DpConfig& cfg) {
  const DpSampler sampler(data, cfg);
  GibbsState state = GibbsState::initial(data, cfg);
  for (std::size_t s = 0; s < cfg.burn_in_sweeps; ++s) sampler.sweep(state);

  PosteriorSummary out;
  out.mean.assign(data.size(), 0.0);
  std::vector<double> cond;
  double alpha_mean = 0.0;
  double alpha_m2 = 0.0;
  double clusters_sum = 0.0;
  for (std::size_t s = 0; s < cfg.sample_sweeps; ++s) {
    sampler.sweep(state);
    sampler.conditional_means(state, cond);
    for (std::size_t i = 0; i < cond.size(); ++i) out.mean[i] += cond[i];
    const double delta = state.alpha() - alpha_mean;
    alpha_mean += delta / static_cast<double>(s + 1);
    alpha_m2 += delta * (state.alpha() - alpha_mean);
    clusters_sum += static_cast<double>(state.occupied_clusters());
  }
  const double kept = static_cast<double>(cfg.sample_sweeps);
  for (double& m : out.mean) {
    m = std::clamp(m / kept, cfg.base.lower, cfg.base.upper);
  }
  out.sweeps_used = cfg.sample_sweeps;
  out.alpha_mean = alpha_mean;
  out.alpha_variance = cfg.sample_sweeps > 1 ? alpha_m2 / (kept - 1.0) : 0.0;
  out.occupied_clusters_mean = clusters_sum / kept;
  return out;
}

}  // namespace ebnp
