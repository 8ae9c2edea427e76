#include "ebnp/exactdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ebnp/divergence.hpp"
#include "ebnp/special.hpp"

namespace ebnp {

namespace {

void check_size(std::size_t n) {
  if (n > kMaxExactSize) {
    throw std::length_error("exact DP enumeration refuses n = " + std::to_string(n) +
                            " (limit " + std::to_string(kMaxExactSize) + ")");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("exact DP: alpha must be positive and finite");
  }
}

// Per-subset quantities, indexed by bitmask over the observations.
struct BlockTable {
  std::vector<double> log_term;  // log Gamma(|B|) + log m(z_B)
  std::vector<double> tn_mean;   // E[mu | z_B] under TN_[a,b](mean z_B, 1/|B|)
  std::vector<double> mean;
  std::vector<int> size;
};

BlockTable make_block_table(std::span<const double> z, const UniformBase& base) {
  const std::size_t n = z.size();
  const std::size_t subsets = std::size_t{1} << n;
  BlockTable t;
  t.log_term.assign(subsets, 0.0);
  t.tn_mean.assign(subsets, 0.0);
  t.mean.assign(subsets, 0.0);
  t.size.assign(subsets, 0);
  std::vector<double> members;
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    members.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) members.push_back(z[j]);
    }
    const double k = static_cast<double>(members.size());
    double sum = 0.0;
    for (double v : members) sum += v;
    t.size[mask] = static_cast<int>(members.size());
    t.mean[mask] = sum / k;
    t.log_term[mask] = std::lgamma(k) + log_block_marginal_likelihood(members, base);
    t.tn_mean[mask] =
        truncated_normal_mean(TruncatedNormalParams{sum / k, 1.0 / k, base.lower, base.upper});
  }
  return t;
}

double partition_log_weight(std::span<const std::uint32_t> blocks, double log_alpha,
                            const BlockTable& t) {
  double lw = static_cast<double>(blocks.size()) * log_alpha;
  for (std::uint32_t b : blocks) lw += t.log_term[b];
  return lw;
}

// Normalized partition weights in enumeration order, via a two-pass
// log-sum-exp with a fixed accumulation order.
template <class Visit>
void for_each_weighted_partition(std::size_t n, double log_alpha, const BlockTable& t,
                                 Visit&& visit) {
  double max_lw = -std::numeric_limits<double>::infinity();
  for_each_partition(n, [&](std::span<const std::uint32_t> blocks) {
    max_lw = std::max(max_lw, partition_log_weight(blocks, log_alpha, t));
  });
  double total = 0.0;
  for_each_partition(n, [&](std::span<const std::uint32_t> blocks) {
    total += std::exp(partition_log_weight(blocks, log_alpha, t) - max_lw);
  });
  for_each_partition(n, [&](std::span<const std::uint32_t> blocks) {
    visit(blocks, std::exp(partition_log_weight(blocks, log_alpha, t) - max_lw) / total);
  });
}

}  // namespace

void for_each_partition(std::size_t n,
                        const std::function<void(std::span<const std::uint32_t>)>& visit) {
  check_size(n);
  if (n == 0) return;
  // Restricted-growth string: code[0] = 0, code[j] <= 1 + max(code[0..j-1]).
  std::vector<std::size_t> code(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::vector<std::uint32_t> blocks;
  while (true) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) k = std::max(k, code[j] + 1);
    blocks.assign(k, 0);
    for (std::size_t j = 0; j < n; ++j) blocks[code[j]] |= std::uint32_t{1} << j;
    visit(blocks);

    // Advance to the lexicographic successor.
    std::size_t j = n - 1;
    while (j > 0 && code[j] == prefix_max[j - 1] + 1) --j;
    if (j == 0) return;
    ++code[j];
    prefix_max[j] = std::max(prefix_max[j - 1], code[j]);
    for (std::size_t r = j + 1; r < n; ++r) {
      code[r] = 0;
      prefix_max[r] = prefix_max[j];
    }
  }
}

std::vector<PartitionWeight> partition_weights(const Dataset& data, double alpha,
                                               const UniformBase& base) {
  check_size(data.size());
  check_alpha(alpha);
  base.validate();
  const BlockTable t = make_block_table(data.z(), base);
  const double log_alpha = std::log(alpha);
  std::vector<PartitionWeight> out;
  for_each_partition(data.size(), [&](std::span<const std::uint32_t> blocks) {
    PartitionWeight pw;
    for (std::uint32_t b : blocks) {
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < data.size(); ++j) {
        if (b & (std::uint32_t{1} << j)) idx.push_back(j);
      }
      pw.partition.push_back(std::move(idx));
    }
    pw.log_weight = partition_log_weight(blocks, log_alpha, t);
    out.push_back(std::move(pw));
  });
  return out;
}

MeanVector exact_posterior_mean(const Dataset& data, double alpha,
                                const UniformBase& base) {
  const std::size_t n = data.size();
  check_size(n);
  check_alpha(alpha);
  base.validate();
  const BlockTable t = make_block_table(data.z(), base);
  MeanVector mean(n, 0.0);
  for_each_weighted_partition(n, std::log(alpha), t,
                              [&](std::span<const std::uint32_t> blocks, double w) {
                                for (std::uint32_t b : blocks) {
                                  const double contrib = w * t.tn_mean[b];
                                  for (std::size_t j = 0; j < n; ++j) {
                                    if (b & (std::uint32_t{1} << j)) mean[j] += contrib;
                                  }
                                }
                              });
  for (double& m : mean) m = std::clamp(m, base.lower, base.upper);
  return mean;
}

double exact_loo_rule(const Dataset& data, std::size_t i, double alpha,
                      const UniformBase& base) {
  const std::size_t n = data.size();
  check_size(n);
  check_alpha(alpha);
  base.validate();
  if (i >= n) throw std::out_of_range("exact_loo_rule: index out of range");

  std::vector<double> rest;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) rest.push_back(data[j]);
  }
  const std::size_t m = rest.size();

  // Posterior mean of G given the other observations:
  //   (alpha H + sum_j law(mu_j | Z_-i)) / (alpha + m),
  // where each law is a mixture over partitions of truncated normals. Terms
  // sharing a block are pooled by bitmask with weight P(B in partition)|B|.
  std::vector<double> block_weight;
  BlockTable t;
  if (m > 0) {
    t = make_block_table(rest, base);
    block_weight.assign(std::size_t{1} << m, 0.0);
    for_each_weighted_partition(m, std::log(alpha), t,
                                [&](std::span<const std::uint32_t> blocks, double w) {
                                  for (std::uint32_t b : blocks) {
                                    block_weight[b] += w * t.size[b];
                                  }
                                });
  }

  struct Component {
    double weight;
    double location;
    double scale;
    double log_mass;
  };
  std::vector<Component> comps;
  for (std::size_t b = 1; b < block_weight.size(); ++b) {
    if (block_weight[b] <= 0.0) continue;
    const double scale = 1.0 / std::sqrt(static_cast<double>(t.size[b]));
    const double loc = t.mean[b];
    comps.push_back({block_weight[b], loc, scale,
                     special::normal_log_interval((base.lower - loc) / scale,
                                                  (base.upper - loc) / scale)});
  }

  const double uniform_density = alpha / base.width();
  const double z = data[i];
  const auto prior_density = [&](double mu) {
    double d = uniform_density;
    for (const auto& c : comps) {
      d += c.weight * std::exp(special::normal_log_pdf((mu - c.location) / c.scale) -
                               std::log(c.scale) - c.log_mass);
    }
    return d / (alpha + static_cast<double>(m));
  };

  const SimpsonGrid grid(base.lower, base.upper, kDefaultQuadratureStep);
  // Shift the kernel exponent so z far outside [a, b] cannot underflow it.
  const double gap = z - std::clamp(z, base.lower, base.upper);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < grid.num_points(); ++k) {
    const double mu = grid.point(k);
    const double w = grid.weight(k) * std::exp(-0.5 * ((z - mu) * (z - mu) - gap * gap)) *
                     prior_density(mu);
    num += w * mu;
    den += w;
  }
  return std::clamp(num / den, base.lower, base.upper);
}

}  // namespace ebnp
