#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ebnp/dpgibbs.hpp"
#include "ebnp/model.hpp"
#include "ebnp/npmle.hpp"

namespace ebnp::bench {

enum class Method { kBnp, kNpmle, kOracle, kJs, kJsPlus };

std::string method_name(Method m);
// Accepts bnp, npmle, oracle, js, jsplus.
Method parse_method(const std::string& name);

// Sparse normal-means configuration: the first n_nonzero means equal `signal`,
// the rest are 0.
struct Scenario {
  std::size_t n = 1000;
  std::size_t n_nonzero = 5;
  double signal = 7.0;
  std::size_t replicates = 20;
  std::vector<Method> methods{Method::kBnp, Method::kNpmle, Method::kOracle};
  std::uint64_t base_seed = 0;
  DpConfig dp;
  NpmleConfig npmle;

  void validate() const;
  MeanVector true_means() const;
  // Stable identifier used in seed derivation, e.g. "n=1000/k=5/mu=7".
  std::string id() const;
};

inline constexpr std::size_t kCiReplicates = 20;
inline constexpr std::size_t kFullReplicates = 100;

// The twelve configurations n1 in {5, 50, 500} x mu in {3, 4, 5, 7} at n = 1000.
std::vector<Scenario> table1_scenarios(std::size_t replicates, std::uint64_t base_seed);

struct MethodResult {
  Method method = Method::kOracle;
  // Per replicate; NaN marks a failed replicate.
  std::vector<double> sse;
  std::vector<double> seconds;
  std::vector<std::string> errors;
  std::size_t failures = 0;
  double mean_sse = 0.0;
  double se_sse = 0.0;
  double mean_seconds = 0.0;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<MethodResult> methods;

  const MethodResult* find(Method m) const;
};

// Seed of replicate r: derived from (base_seed, scenario id, r).
std::uint64_t replicate_seed(const Scenario& s, std::size_t r);

// Z ~ N(mu, I_n) for replicate r.
Dataset draw_replicate(const Scenario& s, std::size_t r);

// Runs one method on one dataset; used by run_scenario and the CLI.
MeanVector run_method(Method m, const Dataset& data, const MeanVector& truth,
                      const Scenario& s, std::uint64_t seed);

// Runs every replicate (in parallel over `workers` threads) and aggregates.
// Method failures become missing cells; the batch never aborts.
ScenarioResult run_scenario(const Scenario& s, std::size_t workers = 1);

void aggregate(MethodResult& r);

// Flat key-value stanzas, each opened by a `[scenario]` line:
//   n, n_nonzero, mu, replicates, methods (comma list), base_seed,
//   burn_in, sweeps, alpha_fixed, grid.
// Omitted keys keep the Scenario defaults. `#` starts a comment.
std::vector<Scenario> parse_scenarios(std::istream& in);

enum class ReportFormat { kCsv, kMarkdown };

std::string report(const std::vector<ScenarioResult>& results, ReportFormat format);

// Parsed CSV report row.
struct ReportRow {
  std::size_t n = 0;
  std::size_t n_nonzero = 0;
  double signal = 0.0;
  std::size_t replicates = 0;
  std::string method;
  double mean_sse = 0.0;
  double se_sse = 0.0;
  double mean_seconds = 0.0;
  std::size_t failures = 0;
};

std::vector<ReportRow> parse_report_csv(std::istream& in);

}  // namespace ebnp::bench
