#pragma once

#include "zvmcmc/models.hpp"
#include "zvmcmc/rng.hpp"

#include <cstdint>
#include <limits>
#include <string>

namespace zv {

struct SamplerConfig {
  std::size_t burn_in = 1000;
  std::size_t length = 2000;
  std::uint64_t seed = 1;
  /// Per-coordinate random-walk scale (Metropolis-Hastings only).
  Vector proposal_sd;
  /// Optional lower-triangular factor L: increments L * N(0, I) replace the
  /// per-coordinate ones when set.
  Matrix proposal_factor;
  ParamVector init;
  /// Steps of the acceptance-rate pilot run before burn-in (MH only, not adaptive).
  std::size_t pilot_steps = 500;
  /// Gradients are required for control variates; reference chains may skip them.
  bool cache_gradients = true;
};

/// Retained draws (burn-in discarded) with log-density gradients at each draw.
struct ChainOutput {
  Matrix draws;      // N x d
  Matrix gradients;  // N x d, empty when not cached
  double accept_rate = 1.0;
  double pilot_accept_rate = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed_used = 0;
  std::string model_tag;
  std::string sampler_tag;
  double sampling_seconds = 0.0;
  double gradient_seconds = 0.0;

  Eigen::Index size() const { return draws.rows(); }
  Eigen::Index dimension() const { return draws.cols(); }
  bool has_gradients() const { return gradients.rows() == draws.rows() && gradients.size() > 0; }
};

/// Random-walk Metropolis-Hastings with Gaussian increments (independent per
/// coordinate unless proposal_factor is set). Proposals outside the support
/// are rejected.
ChainOutput rw_metropolis(const TargetModel& model, const SamplerConfig& config);

/// Albert-Chib data-augmentation Gibbs sampler for the flat-prior probit
/// posterior.
ChainOutput gibbs_probit(const BinaryRegressionData& data, const SamplerConfig& config);

/// Exact draw from Normal(mean, sd^2) restricted to (lower, upper); either bound
/// may be infinite.
double truncated_normal_draw(double mean, double sd, double lower, double upper, Rng& rng);

}  // namespace zv
