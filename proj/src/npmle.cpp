#include "ebnp/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "ebnp/rules.hpp"
#include "ebnp/special.hpp"

namespace ebnp {

namespace {

constexpr double kPruneThreshold = 1e-12;
// EM hands over to the Newton polish at this relative objective change.
constexpr double kWarmStartTol = 1e-6;
// Extrapolated EM weights are floored here so multiplicative updates can
// still revive an atom.
constexpr double kRevivalFloor = 1e-30;
constexpr int kMaxNewtonSteps = 200;
constexpr double kHessianRidge = 1e-10;
constexpr double kQpZero = 1e-15;
constexpr double kQpOptimality = 1e-13;

// Row-scaled likelihood matrix: row i holds phi(z_i - g_j) / max_j phi(z_i - g_j).
// Row scaling leaves EM updates, the gradient and Newton directions unchanged.
class Likelihood {
 public:
  Likelihood(std::span<const double> z, std::span<const double> grid)
      : values_(static_cast<Eigen::Index>(z.size()), static_cast<Eigen::Index>(grid.size())),
        log_scale_sum_(0.0) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double g : grid) best = std::min(best, (z[i] - g) * (z[i] - g));
      log_scale_sum_ += -0.5 * best - special::kLogSqrt2Pi;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double d = z[i] - grid[j];
        values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            std::exp(-0.5 * (d * d - best));
      }
    }
  }

  Eigen::Index n() const { return values_.rows(); }
  Eigen::Index m() const { return values_.cols(); }
  const Eigen::MatrixXd& matrix() const { return values_; }

  // f = L w; returns the (unscaled) mean log-likelihood.
  double mixture(const Eigen::VectorXd& w, Eigen::VectorXd& f) const {
    f.noalias() = values_ * w;
    return (f.array().log().sum() + log_scale_sum_) / static_cast<double>(n());
  }

  // D = L^T (1 / f) / n.
  void gradient(const Eigen::VectorXd& f, Eigen::VectorXd& d) const {
    d.noalias() = values_.transpose() * f.cwiseInverse();
    d /= static_cast<double>(n());
  }

 private:
  Eigen::MatrixXd values_;
  double log_scale_sum_;
};

struct Workspace {
  Eigen::VectorXd f;
  Eigen::VectorXd d;
};

// One multiplicative update w_j <- w_j D_j. Reports the objective and the
// largest gradient excess max_j D_j - 1 at the input weights.
void em_map(const Likelihood& lik, const Eigen::VectorXd& w, Eigen::VectorXd& out,
            double& objective, double& gap, Workspace& ws) {
  objective = lik.mixture(w, ws.f);
  lik.gradient(ws.f, ws.d);
  gap = ws.d.maxCoeff() - 1.0;
  out = w.cwiseProduct(ws.d);
  out /= out.sum();
}

std::pair<double, double> grid_bounds(const Dataset& data, const NpmleConfig& cfg) {
  const auto [mn, mx] = std::minmax_element(data.z().begin(), data.z().end());
  double lo = cfg.grid_lower.value_or(*mn - 0.5);
  double hi = cfg.grid_upper.value_or(*mx + 0.5);
  if (cfg.support_bound) {
    const double m = *cfg.support_bound;
    lo = std::clamp(lo, -m, m);
    hi = std::clamp(hi, -m, m);
  }
  return {lo, hi};
}

// EM with SQUAREM extrapolation: two EM maps, a squared-extrapolation step,
// then one EM map to stabilize. The extrapolated point is kept only if it does
// not lower the objective, so the recorded objective never decreases.
bool run_em(const Likelihood& lik, Eigen::VectorXd& w, const NpmleConfig& cfg, double tol,
            std::vector<double>& trace, std::size_t& iters) {
  Workspace ws;
  Eigen::VectorXd w1, w2, w_acc, w_stab;
  double obj0 = 0.0, gap0 = 0.0, obj1 = 0.0, gap1 = 0.0, obj_acc = 0.0, gap_acc = 0.0;
  em_map(lik, w, w1, obj0, gap0, ws);
  trace.push_back(obj0);
  double prev_obj = -std::numeric_limits<double>::infinity();
  while (iters < cfg.max_em_iters) {
    const double rel_change = std::abs(obj0 - prev_obj) / std::max(1.0, std::abs(obj0));
    if (rel_change < tol && gap0 <= cfg.kkt_tol) return true;
    prev_obj = obj0;
    em_map(lik, w1, w2, obj1, gap1, ws);
    iters += 2;
    const Eigen::VectorXd r = w1 - w;
    const Eigen::VectorXd v = (w2 - w1) - r;
    const Eigen::VectorXd* next = &w2;
    double step = v.squaredNorm() > 0.0 ? -std::sqrt(r.squaredNorm() / v.squaredNorm()) : -1.0;
    if (step < -1.0) {
      const double obj_w2 = lik.mixture(w2, ws.f);
      for (int tries = 0; tries < 5 && step < -1.0; ++tries) {
        w_acc = (w - 2.0 * step * r + step * step * v).cwiseMax(kRevivalFloor);
        w_acc /= w_acc.sum();
        em_map(lik, w_acc, w_stab, obj_acc, gap_acc, ws);
        ++iters;
        if (std::isfinite(obj_acc) && lik.mixture(w_stab, ws.f) >= obj_w2) {
          next = &w_stab;
          break;
        }
        step = 0.5 * (step - 1.0);
      }
    }
    w = *next;
    em_map(lik, w, w1, obj0, gap0, ws);
    ++iters;
    trace.push_back(obj0);
  }
  return false;
}

// Nonnegative QP  min 1/2 y'Hy + c'y, y >= 0,  by a primal active-set method
// started from the feasible point y0. H is only touched through `hess_block`
// (the principal submatrix on the free set) and `hess_times`.
template <class Block, class Times>
Eigen::VectorXd solve_nonnegative_qp(const Eigen::VectorXd& c, const Eigen::VectorXd& y0,
                                     Block&& hess_block, Times&& hess_times) {
  const Eigen::Index m = c.size();
  Eigen::VectorXd y = y0;
  std::vector<Eigen::Index> free_set;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (y(j) > 0.0) free_set.push_back(j);
  }
  for (int outer = 0; outer < 4 * m + 20; ++outer) {
    for (int inner = 0; inner < m + 5 && !free_set.empty(); ++inner) {
      const Eigen::MatrixXd hpp = hess_block(free_set);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(free_set.size()));
      for (std::size_t a = 0; a < free_set.size(); ++a) rhs(a) = -c(free_set[a]);
      const Eigen::VectorXd cand = hpp.ldlt().solve(rhs);
      double alpha = 1.0;
      for (std::size_t a = 0; a < free_set.size(); ++a) {
        const double cur = y(free_set[a]);
        if (cand(a) <= 0.0) alpha = std::min(alpha, cur / (cur - cand(a)));
      }
      for (std::size_t a = 0; a < free_set.size(); ++a) {
        const double cur = y(free_set[a]);
        y(free_set[a]) = cur + alpha * (cand(a) - cur);
      }
      if (alpha >= 1.0) break;
      std::vector<Eigen::Index> kept;
      for (Eigen::Index j : free_set) {
        if (y(j) > kQpZero) {
          kept.push_back(j);
        } else {
          y(j) = 0.0;
        }
      }
      free_set.swap(kept);
    }
    const Eigen::VectorXd grad = hess_times(y) + c;
    Eigen::Index best = -1;
    double most_negative = -kQpOptimality;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (y(j) == 0.0 && grad(j) < most_negative) {
        most_negative = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    free_set.push_back(best);
    std::sort(free_set.begin(), free_set.end());
  }
  return y;
}

// Sequential quadratic programming on F(x) = -(1/n) sum_i log (Lx)_i + sum_j x_j
// over x >= 0, whose minimizer lies on the simplex. Each step solves the
// nonnegative QP for the local quadratic model, backtracks for sufficient
// decrease and renormalizes (which never increases F).
bool newton_polish(const Likelihood& lik, Eigen::VectorXd& w, const NpmleConfig& cfg,
                   std::vector<double>& trace, std::size_t& iters) {
  const double nd = static_cast<double>(lik.n());
  Workspace ws;
  Eigen::VectorXd f_trial;
  double obj = lik.mixture(w, ws.f);
  for (int it = 0; it < kMaxNewtonSteps; ++it) {
    lik.gradient(ws.f, ws.d);
    const double gap = ws.d.maxCoeff() - 1.0;
    if (gap <= cfg.obj_tol) return true;

    const Eigen::MatrixXd scaled = lik.matrix().array().colwise() / ws.f.array();
    const Eigen::VectorXd g = Eigen::VectorXd::Ones(lik.m()) - ws.d;
    const auto hess_times = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
      return (scaled.transpose() * (scaled * y)) / nd + kHessianRidge * y;
    };
    const auto hess_block = [&](const std::vector<Eigen::Index>& idx) {
      Eigen::MatrixXd cols(scaled.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t a = 0; a < idx.size(); ++a) cols.col(a) = scaled.col(idx[a]);
      Eigen::MatrixXd h = (cols.transpose() * cols) / nd;
      h.diagonal().array() += kHessianRidge;
      return h;
    };
    const Eigen::VectorXd c = g - hess_times(w);
    const Eigen::VectorXd y = solve_nonnegative_qp(c, w, hess_block, hess_times);
    const Eigen::VectorXd p = y - w;
    const double slope = g.dot(p);
    if (!(slope < 0.0)) return gap <= cfg.kkt_tol;

    const double f_cur = -obj + w.sum();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      trial = (w + t * p).cwiseMax(0.0);
      const double trial_obj = lik.mixture(trial, f_trial);
      if (std::isfinite(trial_obj) && -trial_obj + trial.sum() <= f_cur + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) return gap <= cfg.kkt_tol;
    trial /= trial.sum();
    const double new_obj = lik.mixture(trial, ws.f);
    if (new_obj < obj) return gap <= cfg.kkt_tol;
    w = trial;
    obj = new_obj;
    ++iters;
    trace.push_back(obj);
  }
  lik.gradient(ws.f, ws.d);
  return ws.d.maxCoeff() - 1.0 <= cfg.kkt_tol;
}

}  // namespace

void NpmleConfig::validate() const {
  if (grid_atoms < 2) throw std::invalid_argument("NpmleConfig: need at least 2 grid atoms");
  if (grid_lower && grid_upper && !(*grid_lower < *grid_upper)) {
    throw std::invalid_argument("NpmleConfig: grid_lower must be below grid_upper");
  }
  if (support_bound && !(*support_bound > 0.0)) {
    throw std::invalid_argument("NpmleConfig: support bound must be positive");
  }
  if (!(obj_tol > 0.0) || !(kkt_tol > 0.0)) {
    throw std::invalid_argument("NpmleConfig: tolerances must be positive");
  }
}

std::vector<double> npmle_grid(const Dataset& data, const NpmleConfig& cfg) {
  cfg.validate();
  const auto [lo, hi] = grid_bounds(data, cfg);
  if (!(lo < hi)) return {lo};
  std::vector<double> grid(cfg.grid_atoms);
  const double step = (hi - lo) / static_cast<double>(cfg.grid_atoms - 1);
  for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = lo + static_cast<double>(j) * step;
  grid.back() = hi;
  return grid;
}

double mixture_gradient(const Dataset& data, const DiscreteMixingMeasure& g, double mu) {
  const GaussianMixtureDensity f(g);
  double s = 0.0;
  for (double z : data.z()) {
    s += std::exp(special::normal_log_pdf(z - mu) - f.log_density(z));
  }
  return s / static_cast<double>(data.size());
}

double mean_log_likelihood(const Dataset& data, const DiscreteMixingMeasure& g) {
  const GaussianMixtureDensity f(g);
  double s = 0.0;
  for (double z : data.z()) s += f.log_density(z);
  return s / static_cast<double>(data.size());
}

KktCertificate kkt_certificate(const Dataset& data, const DiscreteMixingMeasure& g,
                               double lower, double upper, std::size_t grid_atoms,
                               double tol) {
  const GaussianMixtureDensity f(g);
  std::vector<double> log_f;
  log_f.reserve(data.size());
  for (double z : data.z()) log_f.push_back(f.log_density(z));
  const auto gradient = [&](double mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      s += std::exp(special::normal_log_pdf(data[i] - mu) - log_f[i]);
    }
    return s / static_cast<double>(data.size());
  };
  KktCertificate cert;
  cert.tol = tol;
  cert.sup_gradient = gradient(lower);
  if (upper > lower) {
    // The 10x refinement contains every original grid point.
    const std::size_t points = 10 * (std::max<std::size_t>(grid_atoms, 2) - 1) + 1;
    const double step = (upper - lower) / static_cast<double>(points - 1);
    for (std::size_t k = 1; k < points; ++k) {
      const double mu = k + 1 == points ? upper : lower + static_cast<double>(k) * step;
      cert.sup_gradient = std::max(cert.sup_gradient, gradient(mu));
    }
  }
  cert.satisfied = cert.sup_gradient <= 1.0 + tol;
  return cert;
}

NpmleFit fit_from(const Dataset& data, const NpmleConfig& cfg,
                  std::vector<double> initial_weights) {
  const std::vector<double> grid = npmle_grid(data, cfg);
  const auto [lo, hi] = grid_bounds(data, cfg);
  if (initial_weights.size() != grid.size()) {
    throw std::invalid_argument("npmle: initial weights do not match the grid");
  }
  double init_total = 0.0;
  for (double w : initial_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("npmle: initial weights must be positive");
    }
    init_total += w;
  }
  for (double& w : initial_weights) w /= init_total;

  const Likelihood lik(data.z(), grid);
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
      initial_weights.data(), static_cast<Eigen::Index>(initial_weights.size()));
  std::vector<double> trace;
  std::size_t iters = 0;
  const double em_tol = cfg.newton_polish ? std::max(cfg.obj_tol, kWarmStartTol) : cfg.obj_tol;
  bool converged = run_em(lik, w, cfg, em_tol, trace, iters);
  if (cfg.newton_polish) converged = newton_polish(lik, w, cfg, trace, iters);

  const std::vector<double> weights(w.data(), w.data() + w.size());
  NpmleFit out{DiscreteMixingMeasure::pruned(grid, weights, kPruneThreshold), {}, iters,
               converged, 0.0, std::move(trace)};
  out.mean_log_likelihood = mean_log_likelihood(data, out.measure);
  out.certificate = kkt_certificate(data, out.measure, lo, hi, grid.size(), cfg.kkt_tol);
  return out;
}

NpmleFit fit(const Dataset& data, const NpmleConfig& cfg) {
  const std::size_t m = npmle_grid(data, cfg).size();
  return fit_from(data, cfg, std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

MeanVector plugin_rule(const Dataset& data, const NpmleConfig& cfg) {
  return separable_apply(fit(data, cfg).measure, data);
}

}  // namespace ebnp
