#pragma once

// Standard normal density / distribution helpers that stay accurate in the
// far tails (probit likelihoods routinely evaluate Phi at -30 and beyond).

namespace zv::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double x);
double log_pdf(double x);
double cdf(double x);
double log_cdf(double x);

/// phi(x) / Phi(x), the inverse Mills ratio evaluated at x.
double pdf_over_cdf(double x);

}  // namespace zv::normal
