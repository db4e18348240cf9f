#pragma once

// Shared fixtures and independent oracles for the test suites.

#include "zvmcmc/models.hpp"
#include "zvmcmc/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace zv::test {

/// Central differences of log_density, step 1e-5 (|beta_j| + 1) unless given.
inline Vector fd_gradient(const TargetModel& model, const ParamVector& beta, double relative_step = 1e-5) {
  Vector g(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double h = relative_step * (std::abs(beta(j)) + 1.0);
    ParamVector up = beta, down = beta;
    up(j) += h;
    down(j) -= h;
    g(j) = (log_density(model, up) - log_density(model, down)) / (2 * h);
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

/// Small random probit/logit data set with overlapping classes.
inline BinaryRegressionData random_binary_data(std::uint64_t seed, Eigen::Index n, Eigen::Index d) {
  Rng rng(seed);
  BinaryRegressionData data;
  data.design.resize(n, d);
  data.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double eta = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      data.design(i, j) = rng.normal();
      eta += 0.5 * data.design(i, j);
    }
    data.response(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  return data;
}

/// GARCH returns at unit scale (omega of order 0.1) so that relative
/// finite-difference steps stay inside the support.
inline ReturnsSeries unit_scale_returns(std::uint64_t seed, Eigen::Index T) {
  Rng rng(seed);
  ReturnsSeries s;
  s.returns.resize(T);
  double h = 1.0, r = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    h = 0.1 + 0.8 * h + 0.1 * r * r;
    r = std::sqrt(h) * rng.normal();
    s.returns(t) = r;
  }
  s.h0 = (s.returns.array() - s.returns.mean()).square().sum() / static_cast<double>(T - 1);
  return s;
}

/// Adaptive Gauss-Kronrod / exp-sinh / sinh-sinh integral of fn over (lo, hi).
inline double integrate(const std::function<double(double)>& fn, double lo, double hi) {
  using namespace boost::math::quadrature;
  const double inf = std::numeric_limits<double>::infinity();
  if (lo == -inf && hi == inf) {
    sinh_sinh<double> integrator;
    return integrator.integrate(fn);
  }
  if (hi == inf) {
    exp_sinh<double> integrator;
    return integrator.integrate(fn, lo, inf);
  }
  return gauss_kronrod<double, 61>::integrate(fn, lo, hi, 15, 1e-12);
}

}  // namespace zv::test
