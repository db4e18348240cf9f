#include "zvmcmc/zv_estimate.hpp"

#include <cmath>
#include <regex>
#include <sstream>

namespace zv {

double TargetFunction::operator()(const Eigen::Ref<const Vector>& beta) const {
  const double x = beta(coordinate);
  switch (transform) {
    case Transform::identity: return x;
    case Transform::square: return x * x;
    case Transform::exp: return std::exp(x);
  }
  return x;
}

Vector TargetFunction::evaluate(const Matrix& draws) const {
  if (coordinate < 0 || coordinate >= draws.cols())
    throw SetupError("target function " + label() + " refers to a missing coordinate");
  Vector out(draws.rows());
  for (Eigen::Index i = 0; i < draws.rows(); ++i) out(i) = (*this)(draws.row(i).transpose());
  return out;
}

std::string TargetFunction::label() const {
  const std::string base = "beta_" + std::to_string(coordinate + 1);
  switch (transform) {
    case Transform::identity: return base;
    case Transform::square: return "square(" + base + ")";
    case Transform::exp: return "exp(" + base + ")";
  }
  return base;
}

TargetFunction TargetFunction::parse(std::string_view text) {
  static const std::regex pattern(R"(^\s*(?:(square|exp)\(\s*)?beta_([0-9]+)\s*\)?\s*$)");
  std::cmatch match;
  if (!std::regex_match(text.begin(), text.end(), match, pattern))
    throw SetupError("cannot parse target function '" + std::string(text) + "'");
  const bool wrapped = match[1].matched;
  const bool closed = text.find(')') != std::string_view::npos;
  if (wrapped != closed) throw SetupError("unbalanced parentheses in target function '" + std::string(text) + "'");
  TargetFunction f;
  const long index = std::stol(match[2].str());
  if (index < 1) throw SetupError("target function coordinates are 1-based");
  f.coordinate = index - 1;
  if (wrapped) f.transform = match[1].str() == "square" ? Transform::square : Transform::exp;
  return f;
}

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::two_chain ? "two-chain" : "single-chain";
}

ControlVariateMatrix<double> eval_control_variates(const ChainOutput& chain, const MonomialBasis& basis) {
  if (!chain.has_gradients()) throw SetupError("eval_control_variates: chain has no cached gradients");
  return eval_control_variates(chain.draws, chain.gradients, basis);
}

ZvResult zv_estimate(const TargetModel& model, const UserFunction& f, const ChainOutput& fit_chain,
                     const ChainOutput& eval_chain, int degree, const std::vector<MultiIndex>& exclusions,
                     const FitOptions& options) {
  for (const ChainOutput* chain : {&fit_chain, &eval_chain}) {
    if (chain->model_tag != model.name() || chain->dimension() != model.dimension())
      throw SetupError("zv_estimate: chain was not drawn from model '" + std::string(model.name()) + "'");
  }
  const auto basis = monomial_basis(static_cast<int>(model.dimension()), degree, exclusions);

  auto values_of = [&](const ChainOutput& chain) {
    Vector out(chain.size());
    for (Eigen::Index i = 0; i < chain.size(); ++i) out(i) = f(chain.draws.row(i).transpose());
    return out;
  };

  ZvResult result;
  result.protocol = &fit_chain == &eval_chain ? Protocol::single_chain : Protocol::two_chain;
  const auto fit_cv = eval_control_variates(fit_chain, basis);
  const Vector fit_f = values_of(fit_chain);
  result.fit = fit_coefficients(fit_cv, fit_f, options);

  if (result.protocol == Protocol::single_chain) {
    result.ftilde = renormalize(fit_f, fit_cv, result.fit);
    result.ordinary_estimate = fit_f.mean();
  } else {
    const auto eval_cv = eval_control_variates(eval_chain, basis);
    const Vector eval_f = values_of(eval_chain);
    result.ftilde = renormalize(eval_f, eval_cv, result.fit);
    result.ordinary_estimate = eval_f.mean();
  }
  result.estimate = result.ftilde.mean();
  return result;
}

std::vector<MultiIndex> default_exclusions(const TargetModel& model) {
  switch (model.kind()) {
    case ModelKind::exponential: return {MultiIndex{1}};
    case ModelKind::gamma:
      if (model.as<GammaTarget>().shape <= 1.0) return {MultiIndex{1}};
      return {};
    default: return {};
  }
}

}  // namespace zv
