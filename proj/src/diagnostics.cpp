#include "zvmcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace zv {
namespace {

constexpr int kZeroMeanBatches = 50;
constexpr std::size_t kMinZeroMeanSamples = 1000;

double sample_variance(const Eigen::Ref<const Vector>& x) {
  if (x.size() < 2) return 0.0;
  return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Spread indistinguishable from rounding noise.
bool numerically_constant(const Eigen::Ref<const Vector>& x) {
  if (x.size() < 2) return true;
  const double scale = std::max(x.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return std::sqrt(sample_variance(x)) <= 1e3 * std::numeric_limits<double>::epsilon() * scale;
}

int reference_batch_count(std::size_t n) {
  return std::max(10, static_cast<int>(std::sqrt(static_cast<double>(n))));
}

}  // namespace

double batch_means_asvar(const Eigen::Ref<const Vector>& series, int batch_count) {
  if (batch_count < 10) throw InsufficientSampleError("batch_means_asvar: need at least 10 batches");
  const auto n = series.size();
  if (n < 2 * static_cast<Eigen::Index>(batch_count))
    throw InsufficientSampleError("batch_means_asvar: series shorter than 2 x batch count");
  const Eigen::Index size = n / batch_count;
  Vector means(batch_count);
  for (int b = 0; b < batch_count; ++b) means(b) = series.segment(b * size, size).mean();
  if ((means.array() == means(0)).all()) return 0.0;
  return static_cast<double>(size) * sample_variance(means);
}

double hill_tail_index(const Eigen::Ref<const Vector>& values) {
  const auto n = values.size();
  if (n < 100) return std::numeric_limits<double>::quiet_NaN();
  const auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  std::vector<double> v(values.data(), values.data() + n);
  std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k + 1), v.end(), std::greater<>());
  const double threshold = v[k];
  if (!(threshold > 0)) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(v[i] / threshold);
  return sum > 0 ? static_cast<double>(k) / sum : std::numeric_limits<double>::infinity();
}

StabilityCheck running_mean_stability(const Eigen::Ref<const Vector>& values, double factor) {
  StabilityCheck check;
  const auto n = values.size();
  check.running_mean.resize(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += values(i);
    check.running_mean(i) = sum / static_cast<double>(i + 1);
  }
  if (n == 0) return check;
  check.estimate = check.running_mean(n - 1);
  const double med = median(std::vector<double>(check.running_mean.data(), check.running_mean.data() + n));
  const double late_max = check.running_mean.tail(n - n / 2).maxCoeff();
  check.statistic = med > 0 ? late_max / med : (late_max > 0 ? std::numeric_limits<double>::infinity() : 1.0);
  check.tail_index = hill_tail_index(values);
  check.divergent = !std::isfinite(check.estimate) || check.statistic > factor || check.tail_index < 1.0;
  return check;
}

LinnikReport linnik_estimate(const ChainOutput& chain) {
  if (!chain.has_gradients()) throw SetupError("linnik_estimate: chain has no cached gradients");
  const auto n = chain.size();
  const auto d = chain.dimension();
  LinnikReport report;
  report.estimate.resize(d);
  report.standard_error.resize(d);
  report.statistic.resize(d);
  report.tail_index.resize(d);
  report.running_mean.resize(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Vector squared = chain.gradients.col(j).array().square().matrix();
    auto check = running_mean_stability(squared);
    report.estimate(j) = check.estimate;
    report.statistic(j) = check.statistic;
    report.tail_index(j) = check.tail_index;
    report.divergent.push_back(check.divergent);
    report.running_mean.col(j) = check.running_mean;
    report.standard_error(j) = n >= 20 ? std::sqrt(batch_means_asvar(squared, std::min<int>(50, static_cast<int>(n / 2))) /
                                                   static_cast<double>(n))
                                       : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::vector<MomentColumnReport> moment_diagnostic(const ControlVariateMatrix<double>& cv, double delta) {
  if (!(delta > 0)) throw DomainError("moment_diagnostic: delta must be positive");
  const auto monomials = cv.basis.active();
  std::vector<MomentColumnReport> out;
  for (Eigen::Index k = 0; k < cv.count(); ++k) {
    const Vector moment = cv.values.col(k).cwiseAbs().array().pow(2.0 + delta).matrix();
    const auto check = running_mean_stability(moment);
    out.push_back({monomial_label(monomials[static_cast<std::size_t>(k)]), check.estimate, check.statistic,
                   check.tail_index, check.divergent});
  }
  return out;
}

std::vector<ZeroMeanColumn> cv_zero_mean_test(const ControlVariateMatrix<double>& cv) {
  if (static_cast<std::size_t>(cv.samples()) < kMinZeroMeanSamples)
    throw InsufficientSampleError("cv_zero_mean_test: need at least 1000 draws");
  const auto monomials = cv.basis.active();
  const double n = static_cast<double>(cv.samples());
  std::vector<ZeroMeanColumn> out;
  for (Eigen::Index k = 0; k < cv.count(); ++k) {
    ZeroMeanColumn column;
    column.monomial = monomial_label(monomials[static_cast<std::size_t>(k)]);
    column.mean = cv.values.col(k).mean();
    if (numerically_constant(cv.values.col(k))) {
      column.degenerate = true;
    } else {
      const double asvar = batch_means_asvar(cv.values.col(k), kZeroMeanBatches);
      if (asvar > 0) column.z_score = column.mean / std::sqrt(asvar / n);
      else column.degenerate = true;
    }
    out.push_back(column);
  }
  return out;
}

RatioReport variance_ratio(const ReplicationStudy& study, Eigen::Index parameter, int degree,
                           const BootstrapOptions& options) {
  const auto it = study.zv_estimates.find(degree);
  if (it == study.zv_estimates.end()) throw SetupError("variance_ratio: no estimates for the requested degree");
  const auto R = study.replications();
  if (R < 2) throw InsufficientSampleError("variance_ratio: need at least 2 replications");
  if (parameter < 0 || parameter >= study.parameters()) throw SetupError("variance_ratio: parameter out of range");

  const Vector ordinary = study.ordinary_estimates.col(parameter);
  const Vector zv = it->second.col(parameter);

  RatioReport report;
  report.method = "paired percentile bootstrap (" + std::to_string(options.resamples) + " resamples, seed " +
                  std::to_string(options.seed) + ")";
  report.ordinary_variance = sample_variance(ordinary);
  report.zv_variance = sample_variance(zv);
  report.infinite = numerically_constant(zv);
  report.point = report.infinite ? std::numeric_limits<double>::infinity()
                                 : report.ordinary_variance / report.zv_variance;
  if (R < kMinReplicationsForInterval) return report;

  Rng rng(options.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, R - 1);
  std::vector<double> ratios;
  ratios.reserve(static_cast<std::size_t>(options.resamples));
  Vector o(R), z(R);
  for (int b = 0; b < options.resamples; ++b) {
    for (Eigen::Index r = 0; r < R; ++r) {
      const auto idx = pick(rng.engine());
      o(r) = ordinary(idx);
      z(r) = zv(idx);
    }
    const double vz = sample_variance(z);
    ratios.push_back(numerically_constant(z) ? std::numeric_limits<double>::infinity() : sample_variance(o) / vz);
  }
  std::sort(ratios.begin(), ratios.end());
  const double tail = 0.5 * (1.0 - options.level);
  report.lo = std::min(quantile(ratios, tail), report.point);
  report.hi = std::max(quantile(ratios, 1.0 - tail), report.point);
  report.interval_available = true;
  return report;
}

std::string_view to_string(SamplerKind kind) {
  return kind == SamplerKind::gibbs_probit ? "gibbs_probit" : "rw_metropolis";
}

ChainOutput run_sampler(SamplerKind kind, const TargetModel& model, const SamplerConfig& config) {
  if (kind == SamplerKind::gibbs_probit) {
    if (model.kind() != ModelKind::probit) throw SetupError("gibbs sampler requires the probit model");
    return gibbs_probit(model.as<ProbitPosterior>().data, config);
  }
  return rw_metropolis(model, config);
}

ReferenceEstimate long_chain_reference(const TargetModel& model, const std::vector<TargetFunction>& functions,
                                       SamplerKind sampler, SamplerConfig config) {
  if (config.length < kMinReferenceLength)
    throw InsufficientSampleError("long_chain_reference: length must be at least 100000");
  config.cache_gradients = false;
  const ChainOutput chain = run_sampler(sampler, model, config);
  const auto p = static_cast<Eigen::Index>(functions.size());
  ReferenceEstimate ref;
  ref.length = config.length;
  ref.accept_rate = chain.accept_rate;
  ref.point.resize(p);
  ref.lo.resize(p);
  ref.hi.resize(p);
  const int batches = reference_batch_count(config.length);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Vector values = functions[static_cast<std::size_t>(k)].evaluate(chain.draws);
    const double half = 1.959963984540054 * std::sqrt(batch_means_asvar(values, batches) / static_cast<double>(values.size()));
    ref.point(k) = values.mean();
    ref.lo(k) = ref.point(k) - half;
    ref.hi(k) = ref.point(k) + half;
  }
  return ref;
}

}  // namespace zv
