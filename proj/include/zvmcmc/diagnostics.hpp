#pragma once

#include "zvmcmc/control_variates.hpp"
#include "zvmcmc/models.hpp"
#include "zvmcmc/samplers.hpp"
#include "zvmcmc/zv_estimate.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace zv {

/// Batch-means estimate of the CLT variance per draw: batch size times the
/// sample variance of the batch means. Uses the first
/// batch_count * floor(N / batch_count) draws.
double batch_means_asvar(const Eigen::Ref<const Vector>& series, int batch_count);

/// Hill estimate of the right-tail index of non-negative values from the
/// largest floor(sqrt(N)) order statistics. NaN when N < 100 or the
/// threshold order statistic is zero.
double hill_tail_index(const Eigen::Ref<const Vector>& values);

/// Stability heuristic for moments that may be infinite. The trace is flagged
/// divergent when its running mean over the second half of the chain exceeds
/// `factor` times the median running mean, or when the Hill tail index of the
/// summands is below 1 (no finite mean).
struct StabilityCheck {
  double estimate = 0.0;
  double statistic = 0.0;  // max(second half) / median
  double tail_index = std::numeric_limits<double>::quiet_NaN();
  bool divergent = false;
  Vector running_mean;
};

StabilityCheck running_mean_stability(const Eigen::Ref<const Vector>& values, double factor = 2.0);

struct LinnikReport {
  Vector estimate;        // m_j = mean of (d log pi / d x_j)^2
  Vector standard_error;  // batch means
  Matrix running_mean;    // N x d
  Vector statistic;
  Vector tail_index;
  std::vector<bool> divergent;
};

LinnikReport linnik_estimate(const ChainOutput& chain);

struct MomentColumnReport {
  std::string monomial;
  double moment = 0.0;  // mean of |g|^(2+delta)
  double statistic = 0.0;
  double tail_index = std::numeric_limits<double>::quiet_NaN();
  bool divergent = false;
};

/// Running means of |g_k|^(2+delta) for every control-variate column.
std::vector<MomentColumnReport> moment_diagnostic(const ControlVariateMatrix<double>& cv, double delta = 0.5);

struct ZeroMeanColumn {
  std::string monomial;
  double mean = 0.0;
  double z_score = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // constant column: test not applicable
};

/// z = sample mean / (batch-means sd / sqrt(N)) per column, on the ordered chain.
std::vector<ZeroMeanColumn> cv_zero_mean_test(const ControlVariateMatrix<double>& cv);

struct ReplicationTimings {
  double ordinary_seconds = 0.0;
  std::map<int, double> zv_seconds;  // per degree
};

/// Estimates from R independent replications of the two-stage protocol.
struct ReplicationStudy {
  Matrix ordinary_estimates;             // R x p
  std::map<int, Matrix> zv_estimates;    // degree -> R x p
  std::vector<std::uint64_t> seeds;      // fit-chain seed of each replication
  ReplicationTimings timings;

  Eigen::Index replications() const { return ordinary_estimates.rows(); }
  Eigen::Index parameters() const { return ordinary_estimates.cols(); }
};

struct BootstrapOptions {
  int resamples = 1000;
  std::uint64_t seed = 20240601;
  double level = 0.95;
};

struct RatioReport {
  double point = 0.0;
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  double ordinary_variance = 0.0;
  double zv_variance = 0.0;
  bool infinite = false;            // ZV arm numerically constant
  bool interval_available = false;  // requires R >= 20
  std::string method;
};

inline constexpr Eigen::Index kMinReplicationsForInterval = 20;

/// Var(ordinary) / Var(ZV) across replications with a paired percentile
/// bootstrap interval.
RatioReport variance_ratio(const ReplicationStudy& study, Eigen::Index parameter, int degree,
                           const BootstrapOptions& options = {});

struct ReferenceEstimate {
  Vector point;
  Vector lo;
  Vector hi;
  std::size_t length = 0;
  double accept_rate = 1.0;
};

enum class SamplerKind { rw_metropolis, gibbs_probit };

std::string_view to_string(SamplerKind kind);

/// Dispatches to rw_metropolis or gibbs_probit (the latter needs a probit model).
ChainOutput run_sampler(SamplerKind kind, const TargetModel& model, const SamplerConfig& config);

inline constexpr std::size_t kMinReferenceLength = 100000;

/// Ordinary MCMC means of each f over one long chain with batch-means 95%
/// intervals.
ReferenceEstimate long_chain_reference(const TargetModel& model, const std::vector<TargetFunction>& functions,
                                       SamplerKind sampler, SamplerConfig config);

}  // namespace zv
