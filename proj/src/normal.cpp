#include "zvmcmc/normal.hpp"

#include <cmath>
#include <numbers>

namespace zv::normal {
namespace {

// Mills ratio (1 - Phi(t)) / phi(t) for t >= 5, Laplace continued fraction.
double mills_ratio_tail(double t) {
  double acc = t;
  for (int k = 60; k >= 1; --k) acc = t + k / acc;
  return 1.0 / acc;
}

constexpr double kTailSwitch = -5.0;

}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_pdf(double x) { return -kLogSqrt2Pi - 0.5 * x * x; }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_cdf(double x) {
  if (x < kTailSwitch) return log_pdf(x) + std::log(mills_ratio_tail(-x));
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(cdf(x));
}

double pdf_over_cdf(double x) {
  if (x < kTailSwitch) return 1.0 / mills_ratio_tail(-x);
  return pdf(x) / cdf(x);
}

}  // namespace zv::normal
