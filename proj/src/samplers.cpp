#include "zvmcmc/samplers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace zv {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Standard normal restricted to [a, b] with 0 <= a < b.
double right_tail(double a, double b, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  if (std::isfinite(b) && (b - a) * alpha < 1.0) {
    // uniform proposal, accept with exp((a^2 - x^2) / 2)
    for (;;) {
      const double x = a + (b - a) * rng.uniform();
      if (std::log(rng.uniform_open()) <= 0.5 * (a * a - x * x)) return x;
    }
  }
  // translated exponential proposal with the optimal rate
  for (;;) {
    const double x = a + rng.exponential() / alpha;
    if (x > b) continue;
    const double diff = x - alpha;
    if (std::log(rng.uniform_open()) <= -0.5 * diff * diff) return x;
  }
}

double standard_truncated(double a, double b, Rng& rng) {
  if (std::isinf(a) && std::isinf(b)) return rng.normal();
  if (a >= 0.0) return right_tail(a, b, rng);
  if (b <= 0.0) return -right_tail(-b, -a, rng);
  if (b - a >= 2.0) {
    for (;;) {
      const double x = rng.normal();
      if (x > a && x < b) return x;
    }
  }
  for (;;) {
    const double x = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform_open()) <= -0.5 * x * x) return x;
  }
}

void validate_config(const TargetModel& model, const SamplerConfig& config, bool needs_proposal) {
  if (config.length < 1) throw SetupError("sampler: chain length must be at least 1");
  if (config.init.size() != model.dimension()) throw SetupError("sampler: init has wrong dimension");
  if (auto why = support_violation(model, config.init); !why.empty())
    throw DomainError("sampler: init outside support: " + why);
  if (needs_proposal && config.proposal_factor.size() > 0) {
    const auto d = model.dimension();
    if (config.proposal_factor.rows() != d || config.proposal_factor.cols() != d)
      throw SetupError("sampler: proposal_factor must be d x d");
    if (!config.proposal_factor.allFinite() || (config.proposal_factor.diagonal().array() <= 0).any())
      throw SetupError("sampler: proposal_factor must be finite with a positive diagonal");
  } else if (needs_proposal) {
    if (config.proposal_sd.size() != model.dimension())
      throw SetupError("sampler: proposal_sd has wrong dimension");
    if (!config.proposal_sd.allFinite() || (config.proposal_sd.array() <= 0).any())
      throw SetupError("sampler: proposal_sd entries must be finite and positive");
  }
}

std::string format_state(const ParamVector& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x(j);
  os << ")";
  return os.str();
}

double checked_log_density(const TargetModel& model, const ParamVector& x) {
  const double lp = log_density(model, x);
  if (!std::isfinite(lp))
    throw SamplerError(std::string(model.name()) + ": non-finite log-density at " + format_state(x));
  return lp;
}

// One MH transition; returns true on acceptance.
bool mh_step(const TargetModel& model, const SamplerConfig& config, ParamVector& x, double& lp, ParamVector& proposal,
             Vector& noise, Rng& rng) {
  if (config.proposal_factor.size() == 0) {
    for (Eigen::Index j = 0; j < x.size(); ++j) proposal(j) = x(j) + config.proposal_sd(j) * rng.normal();
  } else {
    for (Eigen::Index j = 0; j < x.size(); ++j) noise(j) = rng.normal();
    proposal.noalias() = x + config.proposal_factor.triangularView<Eigen::Lower>() * noise;
  }
  if (!in_support(model, proposal)) return false;
  const double lp_proposal = checked_log_density(model, proposal);
  if (std::log(rng.uniform_open()) < lp_proposal - lp) {
    x = proposal;
    lp = lp_proposal;
    return true;
  }
  return false;
}

}  // namespace

double truncated_normal_draw(double mean, double sd, double lower, double upper, Rng& rng) {
  if (!(sd > 0) || !std::isfinite(sd) || !std::isfinite(mean))
    throw DomainError("truncated_normal_draw: sd must be positive and mean finite");
  if (std::isnan(lower) || std::isnan(upper) || !(lower < upper))
    throw DomainError("truncated_normal_draw: require lower < upper");
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  return mean + sd * standard_truncated(a, b, rng);
}

ChainOutput rw_metropolis(const TargetModel& model, const SamplerConfig& config) {
  validate_config(model, config, true);
  const auto d = model.dimension();
  const auto start = Clock::now();

  ChainOutput out;
  out.seed_used = config.seed;
  out.model_tag = std::string(model.name());
  out.sampler_tag = "rw_metropolis";

  ParamVector proposal(d);
  Vector noise(d);
  if (config.pilot_steps > 0) {
    Rng pilot_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    ParamVector x = config.init;
    double lp = checked_log_density(model, x);
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < config.pilot_steps; ++i)
      accepted += mh_step(model, config, x, lp, proposal, noise, pilot_rng);
    out.pilot_accept_rate = static_cast<double>(accepted) / config.pilot_steps;
  }

  Rng rng(config.seed);
  ParamVector x = config.init;
  double lp = checked_log_density(model, x);
  out.draws.resize(config.length, d);
  if (config.cache_gradients) out.gradients.resize(config.length, d);

  Vector gradient;
  bool gradient_current = false;
  double gradient_seconds = 0.0;
  std::size_t accepted = 0;
  const std::size_t total = config.burn_in + config.length;
  for (std::size_t it = 0; it < total; ++it) {
    const bool moved = mh_step(model, config, x, lp, proposal, noise, rng);
    if (moved) gradient_current = false;
    if (it < config.burn_in) continue;
    const auto row = static_cast<Eigen::Index>(it - config.burn_in);
    accepted += moved;
    out.draws.row(row) = x.transpose();
    if (config.cache_gradients) {
      if (!gradient_current) {
        const auto g_start = Clock::now();
        gradient = grad_log_density(model, x);
        gradient_seconds += seconds_since(g_start);
        gradient_current = true;
      }
      out.gradients.row(row) = gradient.transpose();
    }
  }
  out.accept_rate = static_cast<double>(accepted) / config.length;
  out.gradient_seconds = gradient_seconds;
  out.sampling_seconds = seconds_since(start) - gradient_seconds;
  return out;
}

ChainOutput gibbs_probit(const BinaryRegressionData& data, const SamplerConfig& config) {
  const TargetModel model = TargetModel::probit(data);  // validates rank before sampling
  validate_config(model, config, false);
  const auto n = data.observations();
  const auto d = data.regressors();
  const auto start = Clock::now();

  const Matrix& X = data.design;
  const Eigen::LLT<Matrix> precision(X.transpose() * X);
  if (precision.info() != Eigen::Success) throw SetupError("gibbs_probit: X^T X is not positive definite");
  // beta | u ~ N(V X^T u, V) with V = (X^T X)^{-1} = L^{-T} L^{-1}
  const Matrix L = precision.matrixL();

  ChainOutput out;
  out.seed_used = config.seed;
  out.model_tag = std::string(model.name());
  out.sampler_tag = "gibbs_probit";
  out.accept_rate = 1.0;
  out.draws.resize(config.length, d);

  Rng rng(config.seed);
  ParamVector beta = config.init;
  Vector latent(n);
  Vector noise(d);
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t total = config.burn_in + config.length;
  for (std::size_t it = 0; it < total; ++it) {
    const Vector eta = X * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
      latent(i) = data.response(i) == 1 ? truncated_normal_draw(eta(i), 1.0, 0.0, inf, rng)
                                        : truncated_normal_draw(eta(i), 1.0, -inf, 0.0, rng);
    }
    for (Eigen::Index j = 0; j < d; ++j) noise(j) = rng.normal();
    const Vector mean = precision.solve(X.transpose() * latent);
    beta = mean + L.transpose().triangularView<Eigen::Upper>().solve(noise);
    if (it >= config.burn_in) out.draws.row(static_cast<Eigen::Index>(it - config.burn_in)) = beta.transpose();
  }
  out.sampling_seconds = seconds_since(start);

  if (config.cache_gradients) {
    const auto g_start = Clock::now();
    out.gradients.resize(config.length, d);
    for (Eigen::Index i = 0; i < out.draws.rows(); ++i)
      out.gradients.row(i) = grad_log_density(model, out.draws.row(i).transpose()).transpose();
    out.gradient_seconds = seconds_since(g_start);
  }
  return out;
}

}  // namespace zv
