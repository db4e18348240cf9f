#pragma once

#include "zvmcmc/control_variates.hpp"
#include "zvmcmc/models.hpp"
#include "zvmcmc/samplers.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace zv {

/// f(beta) = transform(beta_k): the coordinate projections and a few fixed
/// transforms of them.
struct TargetFunction {
  enum class Transform { identity, square, exp };

  Eigen::Index coordinate = 0;
  Transform transform = Transform::identity;

  double operator()(const Eigen::Ref<const Vector>& beta) const;
  Vector evaluate(const Matrix& draws) const;
  std::string label() const;

  /// Parses "beta_2", "square(beta_1)", "exp(beta_3)" (1-based coordinates).
  static TargetFunction parse(std::string_view text);
};

using UserFunction = std::function<double(const Eigen::Ref<const Vector>&)>;

enum class Protocol { two_chain, single_chain };

std::string_view to_string(Protocol protocol);

struct ZvResult {
  double estimate = 0.0;
  double ordinary_estimate = 0.0;
  ZVFit<double> fit;
  Vector ftilde;
  Protocol protocol = Protocol::two_chain;
};

ControlVariateMatrix<double> eval_control_variates(const ChainOutput& chain, const MonomialBasis& basis);

/// Basis -> control variates -> coefficients fitted on `fit_chain` ->
/// renormalised f averaged over `eval_chain`. Passing the same object for both
/// chains gives the single-chain protocol.
ZvResult zv_estimate(const TargetModel& model, const UserFunction& f, const ChainOutput& fit_chain,
                     const ChainOutput& eval_chain, int degree, const std::vector<MultiIndex>& exclusions = {},
                     const FitOptions& options = {});

/// Unbiasedness exclusions shipped per model: the linear monomial for the
/// exponential target and for gamma targets with shape <= 1, where the
/// density does not vanish at 0. Nothing otherwise.
std::vector<MultiIndex> default_exclusions(const TargetModel& model);

}  // namespace zv
