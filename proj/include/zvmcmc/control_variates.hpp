#pragma once

// Polynomial zero-variance control variates.
//
// For a trial polynomial m and z = -1/2 grad log pi, the control variate
//     g_m(x) = -1/2 Laplacian m(x) + grad m(x) . z(x)
// has zero mean under pi whenever pi * grad m vanishes on the boundary of the
// support. A fitted combination f + sum_k c_k g_k keeps the mean of f and,
// with c chosen to minimise its second moment, has (much) smaller variance.

#include "zvmcmc/basis.hpp"
#include "zvmcmc/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace zv {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// z = -1/2 grad log pi.
template <typename Derived>
auto control_variate_z(const Eigen::MatrixBase<Derived>& gradient) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(-0.5) * gradient).eval();
}

/// Column k holds g_k evaluated at every draw; columns follow basis.active().
template <typename Scalar>
struct ControlVariateMatrix {
  MatrixX<Scalar> values;
  MonomialBasis basis;

  Eigen::Index samples() const { return values.rows(); }
  Eigen::Index count() const { return values.cols(); }
};

/// Evaluates the control variates of `basis` at each row of `draws`, given
/// the matching rows of grad log pi.
template <typename DerivedX, typename DerivedG>
ControlVariateMatrix<typename DerivedX::Scalar> eval_control_variates(const Eigen::MatrixBase<DerivedX>& draws,
                                                                      const Eigen::MatrixBase<DerivedG>& gradients,
                                                                      const MonomialBasis& basis) {
  using Scalar = typename DerivedX::Scalar;
  const auto n = draws.rows();
  const auto d = draws.cols();
  if (gradients.rows() != n || gradients.cols() != d)
    throw SetupError("eval_control_variates: gradients must match draws in shape");
  if (basis.dimension != d) throw SetupError("eval_control_variates: basis dimension differs from chain dimension");

  const auto monomials = basis.active();
  const auto K = static_cast<Eigen::Index>(monomials.size());
  const int p = basis.degree;

  ControlVariateMatrix<Scalar> cv;
  cv.basis = basis;
  cv.values.resize(n, K);

  // powers(j, e) = x_j^e for e = 0..p
  MatrixX<Scalar> powers(d, p + 1);
  VectorX<Scalar> z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    z = control_variate_z(gradients.row(i).transpose());
    for (Eigen::Index j = 0; j < d; ++j) {
      powers(j, 0) = Scalar(1);
      for (int e = 1; e <= p; ++e) powers(j, e) = powers(j, e - 1) * draws(i, j);
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto& alpha = monomials[static_cast<std::size_t>(k)];
      Scalar value(0);
      for (Eigen::Index j = 0; j < d; ++j) {
        const int a = alpha[static_cast<std::size_t>(j)];
        if (a == 0) continue;
        // product of the other coordinates' powers
        Scalar rest(1);
        for (Eigen::Index l = 0; l < d; ++l)
          if (l != j) rest *= powers(l, alpha[static_cast<std::size_t>(l)]);
        value += Scalar(a) * powers(j, a - 1) * rest * z(j);
        if (a >= 2) value -= Scalar(0.5) * Scalar(a * (a - 1)) * powers(j, a - 2) * rest;
      }
      cv.values(i, k) = value;
    }
  }
  return cv;
}

/// How the moment matrices entering the coefficient solve are formed.
enum class MomentConvention {
  raw,       // E[g g^T], E[g f]
  centered,  // Cov(g), Cov(g, f)
};

struct FitOptions {
  MomentConvention moments = MomentConvention::centered;
  /// Columns with variance below this fraction of their mean square are dropped.
  double degenerate_tolerance = 1e-12;
  /// Above this condition number the system is refit with a ridge term.
  double condition_limit = 1e10;
  /// Ridge = ridge_scale * trace / K on the (column-scaled) diagonal.
  double ridge_scale = 1e-10;
};

template <typename Scalar>
struct ZVFit {
  /// One entry per control-variate column; dropped columns carry 0.
  VectorX<Scalar> coefficients;
  MatrixX<Scalar> sigma_gg;
  VectorX<Scalar> sigma_gf;
  Scalar condition_estimate = Scalar(1);
  std::vector<Eigen::Index> dropped_columns;
  /// Every column was degenerate; the fit is the zero fit.
  bool all_degenerate = false;
  bool ridge_applied = false;
  MomentConvention moments = MomentConvention::centered;
};

/// Coefficients c minimising the sample second moment (or variance) of
/// f + G c, i.e. c = -Sigma_gg^{-1} sigma_gf on the non-degenerate columns.
template <typename Scalar, typename DerivedF>
ZVFit<Scalar> fit_coefficients(const ControlVariateMatrix<Scalar>& cv, const Eigen::MatrixBase<DerivedF>& f_values,
                               const FitOptions& options = {}) {
  const auto n = cv.samples();
  const auto K = cv.count();
  if (f_values.size() != n) throw SetupError("fit_coefficients: f has a different length than the chain");

  ZVFit<Scalar> fit;
  fit.moments = options.moments;
  fit.coefficients = VectorX<Scalar>::Zero(K);

  const bool centered = options.moments == MomentConvention::centered;
  const VectorX<Scalar> col_mean = n > 0 ? VectorX<Scalar>(cv.values.colwise().mean().transpose())
                                         : VectorX<Scalar>::Zero(K);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < K; ++k) {
    const Scalar mean_square = n > 0 ? cv.values.col(k).squaredNorm() / Scalar(n) : Scalar(0);
    const Scalar variance = n > 0 ? (cv.values.col(k).array() - col_mean(k)).square().mean() : Scalar(0);
    if (!(mean_square > Scalar(0)) || variance < Scalar(options.degenerate_tolerance) * mean_square)
      fit.dropped_columns.push_back(k);
    else
      kept.push_back(k);
  }
  const auto m = static_cast<Eigen::Index>(kept.size());
  if (m == 0) {
    fit.all_degenerate = true;
    fit.sigma_gg = MatrixX<Scalar>::Zero(K, K);
    fit.sigma_gf = VectorX<Scalar>::Zero(K);
    return fit;
  }
  if (n <= m) throw InsufficientSampleError("fit_coefficients: need more samples than control variates");

  MatrixX<Scalar> G(n, m);
  for (Eigen::Index c = 0; c < m; ++c) G.col(c) = cv.values.col(kept[static_cast<std::size_t>(c)]);
  VectorX<Scalar> f = f_values.template cast<Scalar>();
  if (centered) {
    G.rowwise() -= G.colwise().mean();
    f.array() -= f.mean();
  }
  const MatrixX<Scalar> S = (G.transpose() * G) / Scalar(n);
  const VectorX<Scalar> s = (G.transpose() * f) / Scalar(n);

  fit.sigma_gg = MatrixX<Scalar>::Zero(K, K);
  fit.sigma_gf = VectorX<Scalar>::Zero(K);
  for (Eigen::Index a = 0; a < m; ++a) {
    fit.sigma_gf(kept[static_cast<std::size_t>(a)]) = s(a);
    for (Eigen::Index b = 0; b < m; ++b)
      fit.sigma_gg(kept[static_cast<std::size_t>(a)], kept[static_cast<std::size_t>(b)]) = S(a, b);
  }

  // Solve in unit-diagonal scaling; the solution is unchanged by it.
  const VectorX<Scalar> scale = S.diagonal().cwiseSqrt().cwiseInverse();
  MatrixX<Scalar> scaled = scale.asDiagonal() * S * scale.asDiagonal();
  const VectorX<Scalar> rhs = -(scale.asDiagonal() * s);

  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(scaled, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues().minCoeff();
  const Scalar hi = eig.eigenvalues().maxCoeff();
  fit.condition_estimate = lo > Scalar(0) ? std::max(Scalar(1), hi / lo) : std::numeric_limits<Scalar>::infinity();
  if (!(fit.condition_estimate <= Scalar(options.condition_limit))) {
    scaled.diagonal().array() += Scalar(options.ridge_scale) * scaled.trace() / Scalar(m);
    fit.ridge_applied = true;
  }
  const Eigen::LDLT<MatrixX<Scalar>> ldlt(scaled);
  const VectorX<Scalar> y = ldlt.solve(rhs);
  for (Eigen::Index a = 0; a < m; ++a)
    fit.coefficients(kept[static_cast<std::size_t>(a)]) = scale(a) * y(a);
  return fit;
}

/// f~_i = f_i + sum_k c_k g_k(x_i).
template <typename Scalar, typename DerivedF>
VectorX<Scalar> renormalize(const Eigen::MatrixBase<DerivedF>& f_values, const ControlVariateMatrix<Scalar>& cv,
                            const ZVFit<Scalar>& fit) {
  if (f_values.size() != cv.samples()) throw SetupError("renormalize: f has a different length than the chain");
  if (fit.coefficients.size() != cv.count()) throw SetupError("renormalize: fit and control variates disagree");
  if (cv.count() == 0) return f_values.template cast<Scalar>();
  return f_values.template cast<Scalar>() + cv.values * fit.coefficients;
}

}  // namespace zv
