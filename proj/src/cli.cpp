#include "ebnp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "ebnp/bench.hpp"
#include "ebnp/divergence.hpp"
#include "ebnp/dpgibbs.hpp"
#include "ebnp/exactdp.hpp"
#include "ebnp/model.hpp"
#include "ebnp/npmle.hpp"
#include "ebnp/rules.hpp"

#ifndef EBNP_VERSION
#define EBNP_VERSION "unknown"
#endif

namespace ebnp {

namespace {

// Thrown for input that parses but is unusable as asked; maps to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

UniformBase parse_base(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError("--base expects 'lower,upper', got '" + text + "'");
  }
  UniformBase b;
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(0, comma);
    const std::string hi = text.substr(comma + 1);
    b.lower = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    b.upper = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
  } catch (const std::logic_error&) {
    throw UsageError("--base expects 'lower,upper', got '" + text + "'");
  }
  if (!(b.lower < b.upper)) throw UsageError("--base requires lower < upper");
  return b;
}

void write_estimates(const std::string& path, const Dataset& data, const MeanVector& mu,
                     std::ostream& fallback) {
  std::ostringstream os;
  os << "z,mu_hat\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << format_double(data[i]) << ',' << format_double(mu[i]) << '\n';
  }
  if (path.empty()) {
    fallback << os.str();
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << os.str();
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

struct DenoiseArgs {
  std::string method = "bnp";
  std::string input;
  std::string output;
  std::size_t burn_in = 2000;
  std::size_t sweeps = 10000;
  std::uint64_t seed = 0;
  std::optional<double> alpha_fixed;
  std::optional<double> alpha_shape;
  std::optional<double> alpha_scale;
  std::string base = "-10,10";
  std::size_t grid = 300;
  std::optional<double> support_bound;
  std::string prior_out;
  std::string truth;
};

int run_denoise(const DenoiseArgs& a, std::ostream& out, std::ostream& err) {
  const bench::Method method = bench::parse_method(a.method);
  if (method == bench::Method::kOracle && a.truth.empty()) {
    throw UsageError("--method oracle requires --truth");
  }
  if (!a.prior_out.empty() && method != bench::Method::kNpmle) {
    throw UsageError("--prior-out only applies to --method npmle");
  }
  const Dataset data = read_dataset_csv_file(a.input);
  MeanVector mu;
  switch (method) {
    case bench::Method::kBnp: {
      DpConfig cfg;
      cfg.base = parse_base(a.base);
      cfg.burn_in_sweeps = a.burn_in;
      cfg.sample_sweeps = a.sweeps;
      cfg.seed = a.seed;
      cfg.alpha_fixed = a.alpha_fixed;
      if (a.alpha_shape) cfg.alpha_shape = *a.alpha_shape;
      if (a.alpha_scale) cfg.alpha_scale = *a.alpha_scale;
      mu = estimate(data, cfg).mean;
      break;
    }
    case bench::Method::kNpmle: {
      NpmleConfig cfg;
      cfg.grid_atoms = a.grid;
      cfg.support_bound = a.support_bound;
      const NpmleFit f = fit(data, cfg);
      if (!f.certificate.satisfied) {
        err << "warning: NPMLE optimality certificate not met (sup gradient "
            << format_double(f.certificate.sup_gradient) << ")\n";
      }
      if (!a.prior_out.empty()) {
        std::ofstream g(a.prior_out);
        if (!g) throw std::runtime_error("cannot open '" + a.prior_out + "' for writing");
        write_measure_csv(g, f.measure);
      }
      mu = separable_apply(f.measure, data);
      break;
    }
    case bench::Method::kOracle: {
      const Dataset truth = read_dataset_csv_file(a.truth);
      mu = oracle_rule(MeanVector(truth.z().begin(), truth.z().end()), data);
      break;
    }
    case bench::Method::kJs:
    case bench::Method::kJsPlus:
      if (data.size() < 3) {
        err << "warning: James-Stein needs n >= 3 to dominate the MLE; refusing n = "
            << data.size() << '\n';
        return kExitRuntime;
      }
      mu = james_stein(data, method == bench::Method::kJsPlus);
      break;
  }
  write_estimates(a.output, data, mu, out);
  return kExitOk;
}

int run_diagnose(const std::string& g_path, const std::string& q_path, std::ostream& out) {
  const DiscreteMixingMeasure g = read_measure_csv_file(g_path);
  const DiscreteMixingMeasure q = read_measure_csv_file(q_path);
  out << "hellinger,kl,fisher\n"
      << format_double(hellinger(g, q)) << ',' << format_double(kl(g, q)) << ','
      << format_double(fisher_divergence(g, q)) << '\n';
  return kExitOk;
}

int run_exact(const std::string& input, double alpha, const std::string& base,
              const std::string& output, std::ostream& out) {
  const UniformBase b = parse_base(base);
  const Dataset data = read_dataset_csv_file(input);
  if (data.size() > kMaxExactSize) {
    throw UsageError("exact enumeration refuses n = " + std::to_string(data.size()) +
                     " (limit " + std::to_string(kMaxExactSize) + ")");
  }
  write_estimates(output, data, exact_posterior_mean(data, alpha, b), out);
  return kExitOk;
}

int run_simulate(const std::string& config, const std::string& out_path, bool full,
                 std::size_t workers, std::ostream& out) {
  std::ifstream in(config);
  if (!in) throw std::runtime_error("cannot open scenario file '" + config + "'");
  std::vector<bench::Scenario> scenarios = bench::parse_scenarios(in);
  std::vector<bench::ScenarioResult> results;
  for (auto& s : scenarios) {
    if (full) s.replicates = bench::kFullReplicates;
    results.push_back(bench::run_scenario(s, workers));
  }
  std::ofstream f(out_path);
  if (!f) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  f << bench::report(results, bench::ReportFormat::kCsv);
  if (!f) throw std::runtime_error("write to '" + out_path + "' failed");
  out << bench::report(results, bench::ReportFormat::kMarkdown);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empirical Bayes denoising for the Gaussian sequence model", "ebnp"};
  app.set_version_flag("--version", std::string(EBNP_VERSION));
  app.require_subcommand(1);

  DenoiseArgs d;
  auto* denoise = app.add_subcommand("denoise", "Estimate means from z.csv");
  denoise->add_option("--method", d.method, "bnp|npmle|oracle|js|jsplus")
      ->check(CLI::IsMember({"bnp", "npmle", "oracle", "js", "jsplus"}))
      ->capture_default_str();
  denoise->add_option("--input", d.input, "Dataset CSV (header z)")->required();
  denoise->add_option("--output", d.output, "Output CSV z,mu_hat (stdout if omitted)");
  denoise->add_option("--burnin", d.burn_in, "Burn-in sweeps")->capture_default_str();
  denoise->add_option("--sweeps", d.sweeps, "Retained sweeps")->capture_default_str();
  denoise->add_option("--seed", d.seed, "RNG seed")->capture_default_str();
  auto* fixed = denoise->add_option("--alpha-fixed", d.alpha_fixed, "Hold alpha fixed");
  auto* shape = denoise->add_option("--alpha-shape", d.alpha_shape, "Gamma prior shape");
  auto* scale = denoise->add_option("--alpha-scale", d.alpha_scale, "Gamma prior scale");
  fixed->excludes(shape)->excludes(scale);
  denoise->add_option("--base", d.base, "Uniform base 'lower,upper'")
      ->capture_default_str()
      ->allow_extra_args(false);
  denoise->add_option("--grid", d.grid, "NPMLE grid atoms")->capture_default_str();
  denoise->add_option("--support-bound", d.support_bound, "NPMLE support in [-M, M]");
  denoise->add_option("--prior-out", d.prior_out, "Write fitted NPMLE measure CSV");
  denoise->add_option("--truth", d.truth, "True means CSV (header z) for --method oracle");

  std::string g_path;
  std::string q_path;
  auto* diagnose = app.add_subcommand("diagnose", "Divergences between two mixing measures");
  diagnose->add_option("--g", g_path, "Measure CSV (atom,weight)")->required();
  diagnose->add_option("--q", q_path, "Measure CSV (atom,weight)")->required();

  std::string exact_input;
  std::string exact_output;
  double exact_alpha = 1.0;
  std::string exact_base = "-10,10";
  auto* exact = app.add_subcommand("exact", "Exact DP posterior mean for n <= 12");
  exact->add_option("--input", exact_input, "Dataset CSV (header z)")->required();
  exact->add_option("--alpha", exact_alpha, "Concentration")->capture_default_str();
  exact->add_option("--base", exact_base, "Uniform base 'lower,upper'")->capture_default_str();
  exact->add_option("--output", exact_output, "Output CSV (stdout if omitted)");

  std::string config;
  std::string sim_out;
  bool full = false;
  std::size_t workers = 1;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo benchmark");
  simulate->add_option("--config", config, "Scenario file")->required();
  simulate->add_option("--out", sim_out, "Results CSV")->required();
  simulate->add_flag("--full", full, "Use 100 replicates per scenario");
  simulate->add_option("--workers", workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  if (!args.empty() && args.front().rfind('-', 0) != 0 &&
      app.get_subcommand_no_throw(args.front()) == nullptr) {
    err << "ebnp: unknown subcommand '" << args.front() << "'\n";
    return kExitUsage;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << EBNP_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "ebnp: " << msg << '\n';
    return kExitUsage;
  }

  try {
    if (denoise->parsed()) return run_denoise(d, out, err);
    if (diagnose->parsed()) return run_diagnose(g_path, q_path, out);
    if (exact->parsed()) return run_exact(exact_input, exact_alpha, exact_base, exact_output, out);
    if (simulate->parsed()) return run_simulate(config, sim_out, full, workers, out);
  } catch (const UsageError& e) {
    err << "ebnp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ebnp: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace ebnp
