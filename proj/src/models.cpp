#include "zvmcmc/models.hpp"

#include "zvmcmc/normal.hpp"

#include <cmath>
#include <sstream>

namespace zv {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string describe(const char* what, Eigen::Index index, double value) {
  std::ostringstream os;
  os << what << " (coordinate " << index + 1 << " = " << value << ")";
  return os.str();
}

// log(1 + e^t) without overflow.
double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::Index dimension_of(const TargetModel::Spec& spec) {
  return std::visit(overloaded{
                        [](const GaussianTarget& g) { return g.mean.size(); },
                        [](const ExponentialTarget&) { return Eigen::Index{1}; },
                        [](const GammaTarget&) { return Eigen::Index{1}; },
                        [](const ProbitPosterior& p) { return p.data.regressors(); },
                        [](const LogitPosterior& p) { return p.data.regressors(); },
                        [](const GarchPosterior&) { return Eigen::Index{3}; },
                    },
                    spec);
}

void validate_spec(const TargetModel::Spec& spec) {
  std::visit(overloaded{
                 [](const GaussianTarget& g) {
                   if (g.mean.size() < 1 || g.mean.size() != g.variance.size())
                     throw SetupError("gaussian: mean and variance must have equal, nonzero length");
                   if (!g.mean.allFinite() || !g.variance.allFinite() || (g.variance.array() <= 0).any())
                     throw SetupError("gaussian: variances must be finite and positive");
                 },
                 [](const ExponentialTarget& e) {
                   if (!(e.rate > 0) || !std::isfinite(e.rate))
                     throw SetupError("exponential: rate must be finite and positive");
                 },
                 [](const GammaTarget& g) {
                   if (!(g.shape > 0) || !(g.scale > 0) || !std::isfinite(g.shape) || !std::isfinite(g.scale))
                     throw SetupError("gamma: shape and scale must be finite and positive");
                 },
                 [](const ProbitPosterior& p) { p.data.validate(); },
                 [](const LogitPosterior& p) { p.data.validate(); },
                 [](const GarchPosterior& g) {
                   g.series.validate();
                   g.prior.validate();
                 },
             },
             spec);
}

void check_dimension(const TargetModel& model, const ParamVector& beta) {
  if (beta.size() != model.dimension()) {
    std::ostringstream os;
    os << model.name() << ": parameter has dimension " << beta.size() << ", model expects "
       << model.dimension();
    throw SetupError(os.str());
  }
}

void require_support(const TargetModel& model, const ParamVector& beta) {
  if (auto why = support_violation(model, beta); !why.empty())
    throw DomainError(std::string(model.name()) + ": outside support: " + why);
}

}  // namespace

void BinaryRegressionData::validate() const {
  const auto n = design.rows();
  const auto d = design.cols();
  if (d < 1) throw SetupError("design matrix has no columns");
  if (response.size() != n) throw SetupError("response length differs from design rows");
  if (n < d) throw SetupError("fewer observations than regressors");
  if (!design.allFinite()) throw SetupError("design matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (response(i) != 0 && response(i) != 1) {
      std::ostringstream os;
      os << "response at row " << i + 1 << " is " << response(i) << ", expected 0 or 1";
      throw SetupError(os.str());
    }
    if ((design.row(i).array() == 0.0).all()) {
      std::ostringstream os;
      os << "design row " << i + 1 << " is all zeros";
      throw SetupError(os.str());
    }
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < d) {
    std::ostringstream os;
    os << "design matrix is rank deficient (rank " << qr.rank() << " < " << d << ")";
    throw SetupError(os.str());
  }
}

void ReturnsSeries::validate() const {
  if (returns.size() < 2) throw SetupError("returns series needs at least 2 observations");
  if (!returns.allFinite()) throw SetupError("returns series has non-finite entries");
  if (!(h0 > 0) || !std::isfinite(h0)) throw SetupError("pre-sample variance h0 must be finite and positive");
}

void GarchPrior::validate() const {
  if (!prior_sd.allFinite() || (prior_sd.array() <= 0).any())
    throw SetupError("GARCH prior standard deviations must be finite and positive");
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gaussian: return "gaussian";
    case ModelKind::exponential: return "exponential";
    case ModelKind::gamma: return "gamma";
    case ModelKind::probit: return "probit";
    case ModelKind::logit: return "logit";
    case ModelKind::garch: return "garch";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto kind : {ModelKind::gaussian, ModelKind::exponential, ModelKind::gamma, ModelKind::probit,
                    ModelKind::logit, ModelKind::garch})
    if (to_string(kind) == name) return kind;
  throw SetupError("unknown model kind '" + std::string(name) + "'");
}

TargetModel::TargetModel(Spec spec) {
  validate_spec(spec);
  dimension_ = dimension_of(spec);
  spec_ = std::make_shared<const Spec>(std::move(spec));
}

TargetModel TargetModel::gaussian(double mean, double variance) {
  return gaussian(Vector::Constant(1, mean), Vector::Constant(1, variance));
}
TargetModel TargetModel::gaussian(Vector mean, Vector variance) {
  return TargetModel(GaussianTarget{std::move(mean), std::move(variance)});
}
TargetModel TargetModel::exponential(double rate) { return TargetModel(ExponentialTarget{rate}); }
TargetModel TargetModel::gamma(double shape, double scale) { return TargetModel(GammaTarget{shape, scale}); }
TargetModel TargetModel::probit(BinaryRegressionData data) { return TargetModel(ProbitPosterior{std::move(data)}); }
TargetModel TargetModel::logit(BinaryRegressionData data) { return TargetModel(LogitPosterior{std::move(data)}); }
TargetModel TargetModel::garch(ReturnsSeries series, GarchPrior prior) {
  return TargetModel(GarchPosterior{std::move(series), prior});
}

std::string support_violation(const TargetModel& model, const ParamVector& beta) {
  check_dimension(model, beta);
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (!std::isfinite(beta(j))) return describe("non-finite entry", j, beta(j));
  return std::visit(overloaded{
                        [&](const ExponentialTarget&) -> std::string {
                          return beta(0) > 0 ? "" : describe("x > 0 violated", 0, beta(0));
                        },
                        [&](const GammaTarget&) -> std::string {
                          return beta(0) > 0 ? "" : describe("x > 0 violated", 0, beta(0));
                        },
                        [&](const GarchPosterior&) -> std::string {
                          if (!(beta(0) > 0)) return describe("omega_1 > 0 violated", 0, beta(0));
                          if (!(beta(1) >= 0)) return describe("omega_2 >= 0 violated", 1, beta(1));
                          if (!(beta(2) >= 0)) return describe("omega_3 >= 0 violated", 2, beta(2));
                          return "";
                        },
                        [](const auto&) -> std::string { return ""; },
                    },
                    model.spec());
}

bool in_support(const TargetModel& model, const ParamVector& beta) {
  return support_violation(model, beta).empty();
}

double log_density(const TargetModel& model, const ParamVector& beta) {
  require_support(model, beta);
  return std::visit(
      overloaded{
          [&](const GaussianTarget& g) {
            return -0.5 * ((beta - g.mean).array().square() / g.variance.array()).sum();
          },
          [&](const ExponentialTarget& e) { return -e.rate * beta(0); },
          [&](const GammaTarget& g) { return (g.shape - 1.0) * std::log(beta(0)) - beta(0) / g.scale; },
          [&](const ProbitPosterior& p) {
            const Vector eta = p.data.design * beta;
            double sum = 0.0;
            for (Eigen::Index i = 0; i < eta.size(); ++i)
              sum += normal::log_cdf(p.data.response(i) == 1 ? eta(i) : -eta(i));
            return sum;
          },
          [&](const LogitPosterior& p) {
            const Vector eta = p.data.design * beta;
            double sum = 0.0;
            for (Eigen::Index i = 0; i < eta.size(); ++i)
              sum += (p.data.response(i) == 1 ? eta(i) : 0.0) - softplus(eta(i));
            return sum;
          },
          [&](const GarchPosterior& g) {
            const Eigen::Vector3d omega = beta;
            const Vector h = garch_variance_path(g.series, omega);
            const double prior = -0.5 * (omega.array().square() / g.prior.prior_sd.array().square()).sum();
            return prior - 0.5 * (h.array().log().sum() + (g.series.returns.array().square() / h.array()).sum());
          },
      },
      model.spec());
}

Vector grad_log_density(const TargetModel& model, const ParamVector& beta) {
  require_support(model, beta);
  return std::visit(
      overloaded{
          [&](const GaussianTarget& g) -> Vector {
            return ((g.mean - beta).array() / g.variance.array()).matrix();
          },
          [&](const ExponentialTarget& e) -> Vector { return Vector::Constant(1, -e.rate); },
          [&](const GammaTarget& g) -> Vector {
            return Vector::Constant(1, (g.shape - 1.0) / beta(0) - 1.0 / g.scale);
          },
          [&](const ProbitPosterior& p) -> Vector {
            const Vector eta = p.data.design * beta;
            Vector weight(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i) {
              const double sign = p.data.response(i) == 1 ? 1.0 : -1.0;
              weight(i) = sign * normal::pdf_over_cdf(sign * eta(i));
            }
            return p.data.design.transpose() * weight;
          },
          [&](const LogitPosterior& p) -> Vector {
            const Vector eta = p.data.design * beta;
            Vector weight(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i)
              weight(i) = p.data.response(i) - sigmoid(eta(i));
            return p.data.design.transpose() * weight;
          },
          [&](const GarchPosterior& g) -> Vector {
            if (!(beta(1) > 0) || !(beta(2) > 0))
              throw DomainError("garch: gradient requires omega strictly inside the support");
            const Eigen::Vector3d omega = beta;
            const Vector h = garch_variance_path(g.series, omega);
            const auto dh = garch_h_derivatives(g.series, omega);
            // d/dh_t of -0.5 (log h_t + r_t^2 / h_t)
            const Vector w = (0.5 * (g.series.returns.array().square() / h.array().square() - 1.0 / h.array())).matrix();
            Vector grad = dh.transpose() * w;
            grad -= (omega.array() / g.prior.prior_sd.array().square()).matrix();
            return grad;
          },
      },
      model.spec());
}

Vector garch_variance_path(const ReturnsSeries& series, const Eigen::Vector3d& omega) {
  const auto T = series.returns.size();
  Vector h(T);
  double previous_h = series.h0;
  double previous_r2 = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    h(t) = omega(0) + omega(2) * previous_h + omega(1) * previous_r2;
    previous_h = h(t);
    previous_r2 = series.returns(t) * series.returns(t);
  }
  return h;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> garch_h_derivatives(const ReturnsSeries& series,
                                                             const Eigen::Vector3d& omega) {
  const auto T = series.returns.size();
  Eigen::Matrix<double, Eigen::Dynamic, 3> dh(T, 3);
  Eigen::RowVector3d previous = Eigen::RowVector3d::Zero();
  double previous_h = series.h0;
  double previous_r2 = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::RowVector3d current;
    current(0) = 1.0 + omega(2) * previous(0);
    current(1) = previous_r2 + omega(2) * previous(1);
    current(2) = previous_h + omega(2) * previous(2);
    dh.row(t) = current;
    previous = current;
    previous_h = omega(0) + omega(2) * previous_h + omega(1) * previous_r2;
    previous_r2 = series.returns(t) * series.returns(t);
  }
  return dh;
}

}  // namespace zv
