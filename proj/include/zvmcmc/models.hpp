#pragma once

#include "zvmcmc/types.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <variant>

namespace zv {

/// Binary-response regression data: rows of `design` are the regressors x_i,
/// `response` holds y_i in {0, 1}.
struct BinaryRegressionData {
  Matrix design;
  Eigen::VectorXi response;

  Eigen::Index observations() const { return design.rows(); }
  Eigen::Index regressors() const { return design.cols(); }

  /// Throws SetupError naming the first violated invariant (shape, binary
  /// response, zero rows, n >= d, full column rank).
  void validate() const;
};

/// Daily relative returns with the pre-sample variance h_0.
struct ReturnsSeries {
  Vector returns;
  double h0 = 1.0;

  void validate() const;
};

/// Standard deviations of the independent truncated-normal priors on omega.
struct GarchPrior {
  Eigen::Vector3d prior_sd = Eigen::Vector3d::Constant(1000.0);

  void validate() const;
};

struct GaussianTarget {
  Vector mean;
  Vector variance;  // diagonal covariance
};

struct ExponentialTarget {
  double rate = 1.0;
};

/// Shape-scale parameterisation: density proportional to x^(shape-1) exp(-x/scale).
struct GammaTarget {
  double shape = 1.0;
  double scale = 1.0;
};

struct ProbitPosterior {
  BinaryRegressionData data;
};

struct LogitPosterior {
  BinaryRegressionData data;
};

/// GARCH(1,1) posterior over omega = (constant, ARCH weight, GARCH weight)
/// with h_t = omega_1 + omega_3 h_{t-1} + omega_2 r_{t-1}^2, seeded at
/// h_1 = omega_1 + omega_3 h_0 (the pre-sample return r_0 is taken as 0).
struct GarchPosterior {
  ReturnsSeries series;
  GarchPrior prior;
};

enum class ModelKind { gaussian, exponential, gamma, probit, logit, garch };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Unnormalised target density with analytic gradient and support predicate.
/// Copies share the underlying (immutable) model data.
class TargetModel {
 public:
  using Spec = std::variant<GaussianTarget, ExponentialTarget, GammaTarget,
                            ProbitPosterior, LogitPosterior, GarchPosterior>;

  explicit TargetModel(Spec spec);

  static TargetModel gaussian(double mean, double variance);
  static TargetModel gaussian(Vector mean, Vector variance);
  static TargetModel exponential(double rate);
  static TargetModel gamma(double shape, double scale);
  static TargetModel probit(BinaryRegressionData data);
  static TargetModel logit(BinaryRegressionData data);
  static TargetModel garch(ReturnsSeries series, GarchPrior prior = {});

  Eigen::Index dimension() const { return dimension_; }
  ModelKind kind() const { return static_cast<ModelKind>(spec_->index()); }
  std::string_view name() const { return to_string(kind()); }
  const Spec& spec() const { return *spec_; }

  template <typename T>
  const T& as() const {
    return std::get<T>(*spec_);
  }

 private:
  std::shared_ptr<const Spec> spec_;
  Eigen::Index dimension_;
};

/// Empty string when `beta` is inside the support, otherwise a description of
/// the violated constraint. Throws SetupError on a dimension mismatch.
std::string support_violation(const TargetModel& model, const ParamVector& beta);

bool in_support(const TargetModel& model, const ParamVector& beta);

/// Log of the unnormalised target. Additive constants (Gaussian/Gamma
/// normalisers, the truncated-normal prior normaliser) are dropped.
double log_density(const TargetModel& model, const ParamVector& beta);

/// Analytic gradient of log_density; requires `beta` strictly interior.
Vector grad_log_density(const TargetModel& model, const ParamVector& beta);

/// h_1..h_T of the GARCH recursion.
Vector garch_variance_path(const ReturnsSeries& series, const Eigen::Vector3d& omega);

/// Row t holds (dh_t/domega_1, dh_t/domega_2, dh_t/domega_3). Derivatives of
/// the seed h_0 are zero, so dh_t/domega_1 = (1 - omega_3^t) / (1 - omega_3).
Eigen::Matrix<double, Eigen::Dynamic, 3> garch_h_derivatives(const ReturnsSeries& series,
                                                             const Eigen::Vector3d& omega);

}  // namespace zv
