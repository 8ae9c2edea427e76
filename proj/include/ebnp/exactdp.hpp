#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ebnp/model.hpp"

namespace ebnp {

// Largest n accepted by the enumeration routines (Bell(12) = 4,213,597).
inline constexpr std::size_t kMaxExactSize = 12;

// A set partition of {0, ..., n-1}; blocks are index lists.
struct PartitionWeight {
  std::vector<std::vector<std::size_t>> partition;
  double log_weight = 0.0;
};

// Calls `visit` with the block bitmasks of every set partition of n items, in
// lexicographic order of restricted-growth strings. Blocks appear in order of
// their smallest member.
void for_each_partition(std::size_t n,
                        const std::function<void(std::span<const std::uint32_t>)>& visit);

// All partitions with unnormalized log posterior weights
//   k log(alpha) + sum_B log Gamma(|B|) + sum_B log m(z_B).
// Throws std::length_error for n > kMaxExactSize.
std::vector<PartitionWeight> partition_weights(const Dataset& data, double alpha,
                                               const UniformBase& base);

// E[mu | Z] under the DP mixture with fixed alpha, by exhaustive enumeration.
MeanVector exact_posterior_mean(const Dataset& data, double alpha,
                                const UniformBase& base);

// Leave-one-out form: the Bayes rule at Z_i under the posterior mean of G
// given the other observations, evaluated by quadrature over [a, b].
double exact_loo_rule(const Dataset& data, std::size_t i, double alpha,
                      const UniformBase& base);

}  // namespace ebnp
