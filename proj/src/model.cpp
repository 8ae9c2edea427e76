#include "ebnp/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "ebnp/special.hpp"

namespace ebnp {

namespace sp = special;

namespace {

constexpr double kWeightSumTol = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMixingMeasure

DiscreteMixingMeasure::DiscreteMixingMeasure(std::vector<double> atoms,
                                             std::vector<double> weights,
                                             std::optional<double> support_bound)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  require(!atoms_.empty(), "mixing measure needs at least one atom");
  require(atoms_.size() == weights_.size(),
          "mixing measure: atoms and weights differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    require(std::isfinite(atoms_[k]), "mixing measure: non-finite atom");
    require(std::isfinite(weights_[k]) && weights_[k] >= 0.0,
            "mixing measure: weights must be finite and nonnegative");
    if (support_bound) {
      require(std::abs(atoms_[k]) <= *support_bound,
              "mixing measure: atom outside the support bound");
    }
    total += weights_[k];
  }
  require(std::abs(total - 1.0) <= kWeightSumTol,
          "mixing measure: weights must sum to 1");
}

DiscreteMixingMeasure DiscreteMixingMeasure::point_mass(double atom) {
  return DiscreteMixingMeasure({atom}, {1.0});
}

DiscreteMixingMeasure DiscreteMixingMeasure::pruned(std::vector<double> atoms,
                                                    std::vector<double> weights,
                                                    double threshold) {
  require(atoms.size() == weights.size(),
          "mixing measure: atoms and weights differ in length");
  std::vector<double> kept_atoms;
  std::vector<double> kept_weights;
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (weights[k] >= threshold && weights[k] > 0.0) {
      kept_atoms.push_back(atoms[k]);
      kept_weights.push_back(weights[k]);
      total += weights[k];
    }
  }
  require(!kept_atoms.empty() && total > 0.0,
          "mixing measure: no weight survives thresholding");
  for (double& w : kept_weights) w /= total;
  return DiscreteMixingMeasure(std::move(kept_atoms), std::move(kept_weights));
}

double DiscreteMixingMeasure::min_atom() const {
  return *std::min_element(atoms_.begin(), atoms_.end());
}

double DiscreteMixingMeasure::max_atom() const {
  return *std::max_element(atoms_.begin(), atoms_.end());
}

double DiscreteMixingMeasure::max_abs_atom() const {
  return std::max(std::abs(min_atom()), std::abs(max_atom()));
}

double DiscreteMixingMeasure::mass_near(double center, double radius) const {
  double m = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (std::abs(atoms_[k] - center) <= radius) m += weights_[k];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Simple value types

void UniformBase::validate() const {
  require(std::isfinite(lower) && std::isfinite(upper) && lower < upper,
          "uniform base: need finite lower < upper");
}

Dataset::Dataset(std::vector<double> z) : z_(std::move(z)) {
  require(!z_.empty(), "dataset must contain at least one observation");
  for (double v : z_) require(std::isfinite(v), "dataset: non-finite value");
}

void TruncatedNormalParams::validate() const {
  require(std::isfinite(location), "truncated normal: non-finite location");
  require(std::isfinite(scale2) && scale2 > 0.0,
          "truncated normal: scale2 must be positive");
  require(std::isfinite(lower) && std::isfinite(upper) && lower < upper,
          "truncated normal: need finite lower < upper");
}

double TruncatedNormalParams::scale() const { return std::sqrt(scale2); }

// ---------------------------------------------------------------------------
// Uniform-base closed forms

double log_uniform_base_marginal(double z, const UniformBase& base,
                                 double sigma) {
  base.validate();
  require(std::isfinite(z), "uniform_base_marginal: non-finite z");
  require(std::isfinite(sigma) && sigma > 0.0,
          "uniform_base_marginal: sigma must be positive");
  return sp::normal_log_interval((base.lower - z) / sigma,
                                 (base.upper - z) / sigma) -
         std::log(base.width());
}

double uniform_base_marginal(double z, const UniformBase& base, double sigma) {
  return std::exp(log_uniform_base_marginal(z, base, sigma));
}

double log_block_marginal_likelihood(std::size_t k, double sum, double sum_sq,
                                     const UniformBase& base) {
  require(k >= 1, "block marginal likelihood: empty block");
  base.validate();
  const double kd = static_cast<double>(k);
  const double mean = sum / kd;
  const double ss = std::max(0.0, sum_sq - kd * mean * mean);
  const double root_k = std::sqrt(kd);
  return -kd * sp::kLogSqrt2Pi - 0.5 * ss - std::log(base.width()) +
         sp::kLogSqrt2Pi - 0.5 * std::log(kd) +
         sp::normal_log_interval(root_k * (base.lower - mean),
                                 root_k * (base.upper - mean));
}

double log_block_marginal_likelihood(std::span<const double> zs,
                                     const UniformBase& base) {
  require(!zs.empty(), "block marginal likelihood: empty block");
  base.validate();
  const double kd = static_cast<double>(zs.size());
  const double mean = std::accumulate(zs.begin(), zs.end(), 0.0) / kd;
  double ss = 0.0;
  for (double z : zs) ss += (z - mean) * (z - mean);
  const double root_k = std::sqrt(kd);
  return -kd * sp::kLogSqrt2Pi - 0.5 * ss - std::log(base.width()) +
         sp::kLogSqrt2Pi - 0.5 * std::log(kd) +
         sp::normal_log_interval(root_k * (base.lower - mean),
                                 root_k * (base.upper - mean));
}

double block_marginal_likelihood(std::span<const double> zs,
                                 const UniformBase& base) {
  return std::exp(log_block_marginal_likelihood(zs, base));
}

// ---------------------------------------------------------------------------
// Truncated normal

namespace {

// Draw from N(0,1) restricted to [lo, hi] by inverting the CDF.
double standard_tn_sample(double lo, double hi, Rng& rng) {
  if (lo >= 0.0) return -standard_tn_sample(-hi, -lo, rng);
  const double u = uniform_open(rng);
  double x;
  if (hi <= 0.0) {
    const double log_hi = sp::normal_log_cdf(hi);
    const double log_lo = sp::normal_log_cdf(lo);
    // p = Phi(hi) * (1 - (1 - u) * (1 - Phi(lo)/Phi(hi)))
    const double gap = -std::expm1(log_lo - log_hi);
    x = sp::normal_quantile_log(log_hi + std::log1p(-(1.0 - u) * gap));
  } else {
    const double mass = sp::normal_interval(lo, hi);
    const double p = sp::normal_cdf(lo) + u * mass;
    if (p < 0.5) {
      x = sp::normal_quantile(p);
    } else {
      const double q = sp::normal_cdf(-hi) + (1.0 - u) * mass;
      x = -sp::normal_quantile(q);
    }
  }
  return std::clamp(x, lo, hi);
}

}  // namespace

double truncated_normal_mean(const TruncatedNormalParams& p) {
  p.validate();
  const double tau = p.scale();
  const double lo = (p.lower - p.location) / tau;
  const double hi = (p.upper - p.location) / tau;
  const double log_mass = sp::normal_log_interval(lo, hi);
  const double shift = std::exp(sp::normal_log_pdf(lo) - log_mass) -
                       std::exp(sp::normal_log_pdf(hi) - log_mass);
  return std::clamp(p.location + tau * shift, p.lower, p.upper);
}

double truncated_normal_pdf(const TruncatedNormalParams& p, double x) {
  p.validate();
  if (x < p.lower || x > p.upper) return 0.0;
  const double tau = p.scale();
  const double log_mass = sp::normal_log_interval(
      (p.lower - p.location) / tau, (p.upper - p.location) / tau);
  return std::exp(sp::normal_log_pdf((x - p.location) / tau) - std::log(tau) -
                  log_mass);
}

double truncated_normal_cdf(const TruncatedNormalParams& p, double x) {
  p.validate();
  if (x <= p.lower) return 0.0;
  if (x >= p.upper) return 1.0;
  const double tau = p.scale();
  const double lo = (p.lower - p.location) / tau;
  const double hi = (p.upper - p.location) / tau;
  const double xs = (x - p.location) / tau;
  return std::exp(sp::normal_log_interval(lo, xs) -
                  sp::normal_log_interval(lo, hi));
}

double truncated_normal_sample(const TruncatedNormalParams& p, Rng& rng) {
  p.validate();
  const double tau = p.scale();
  const double x = standard_tn_sample((p.lower - p.location) / tau,
                                      (p.upper - p.location) / tau, rng);
  return std::clamp(p.location + tau * x, p.lower, p.upper);
}

// ---------------------------------------------------------------------------
// GaussianMixtureDensity

GaussianMixtureDensity::GaussianMixtureDensity(DiscreteMixingMeasure g)
    : g_(std::move(g)) {
  log_weights_.reserve(g_.size());
  for (double w : g_.weights()) {
    log_weights_.push_back(w > 0.0 ? std::log(w)
                                   : -std::numeric_limits<double>::infinity());
  }
}

double GaussianMixtureDensity::log_density(double z) const {
  const auto atoms = g_.atoms();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    m = std::max(m, log_weights_[k] + sp::normal_log_pdf(z - atoms[k]));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    s += std::exp(log_weights_[k] + sp::normal_log_pdf(z - atoms[k]) - m);
  }
  return m + std::log(s);
}

double GaussianMixtureDensity::density(double z) const {
  const auto atoms = g_.atoms();
  const auto weights = g_.weights();
  double s = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    s += weights[k] * sp::normal_pdf(z - atoms[k]);
  }
  return s;
}

double GaussianMixtureDensity::derivative(double z) const {
  const auto atoms = g_.atoms();
  const auto weights = g_.weights();
  double s = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    s += weights[k] * (atoms[k] - z) * sp::normal_pdf(z - atoms[k]);
  }
  return s;
}

double GaussianMixtureDensity::score(double z) const {
  const auto atoms = g_.atoms();
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    m = std::max(m, log_weights_[k] - 0.5 * (z - atoms[k]) * (z - atoms[k]));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double e = std::exp(
        log_weights_[k] - 0.5 * (z - atoms[k]) * (z - atoms[k]) - m);
    num += e * (atoms[k] - z);
    den += e;
  }
  return num / den;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": non-numeric cell '" + cell + "'");
  }
  return v;
}

// Reads a numeric CSV whose header must equal `expected` exactly.
std::vector<std::vector<double>> read_numeric_csv(
    std::istream& in, const std::vector<std::string>& expected) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (!have_header) {
      if (cells != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw std::invalid_argument("csv: wrong header '" + line +
                                    "', expected '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != expected.size()) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": expected " +
                                  std::to_string(expected.size()) + " cells");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw std::invalid_argument("csv: missing header");
  return rows;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

DiscreteMixingMeasure read_measure_csv(std::istream& in) {
  const auto rows = read_numeric_csv(in, {"atom", "weight"});
  std::vector<double> atoms;
  std::vector<double> weights;
  for (const auto& r : rows) {
    atoms.push_back(r[0]);
    weights.push_back(r[1]);
  }
  return DiscreteMixingMeasure(std::move(atoms), std::move(weights));
}

void write_measure_csv(std::ostream& out, const DiscreteMixingMeasure& g) {
  out << "atom,weight\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    out << format_double(g.atoms()[k]) << ',' << format_double(g.weights()[k])
        << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  const auto rows = read_numeric_csv(in, {"z"});
  std::vector<double> z;
  z.reserve(rows.size());
  for (const auto& r : rows) z.push_back(r[0]);
  return Dataset(std::move(z));
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "z\n";
  for (double v : data.z()) out << format_double(v) << '\n';
}

DiscreteMixingMeasure read_measure_csv_file(const std::string& path) {
  auto in = open_input(path);
  return read_measure_csv(in);
}

Dataset read_dataset_csv_file(const std::string& path) {
  auto in = open_input(path);
  return read_dataset_csv(in);
}

}  // namespace ebnp
