#pragma once

// Standard normal special functions shared by every module.
//
// All routines are accurate to an absolute error of at most 1e-15 on the
// probability scale; the log-scale variants stay finite (never -inf or NaN)
// for any finite argument.

namespace ebnp::special {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

double normal_pdf(double x);
double normal_log_pdf(double x);

double normal_cdf(double x);
// log Phi(x); uses an asymptotic series once Phi(x) would underflow.
double normal_log_cdf(double x);

// Phi(hi) - Phi(lo) for lo <= hi, without cancellation when both ends sit in
// the same tail.
double normal_interval(double lo, double hi);
// log(Phi(hi) - Phi(lo)) for lo < hi; finite in every regime.
double normal_log_interval(double lo, double hi);

// Phi^{-1}(p) for p in (0, 1).
double normal_quantile(double p);
// Phi^{-1}(exp(log_p)) for log_p < 0, including log_p far below the
// smallest representable double.
double normal_quantile_log(double log_p);

// log(exp(a) + exp(b)).
double log_add(double a, double b);

}  // namespace ebnp::special
