#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace zv {

/// Exponent vector alpha of the monomial x_1^alpha_1 ... x_d^alpha_d.
using MultiIndex = std::vector<int>;

/// Non-constant monomials of total degree 1..p in d variables, in graded
/// lexicographic order (degree ascending, then lexicographically descending
/// exponents: x1, x2, ..., x1^2, x1 x2, ..., x2^2, ...). `excluded` lists
/// monomials removed to keep the estimator unbiased on bounded supports.
struct MonomialBasis {
  int dimension = 0;
  int degree = 0;
  std::vector<MultiIndex> exponents;
  std::vector<MultiIndex> excluded;

  /// Monomials that produce control variates, in basis order.
  std::vector<MultiIndex> active() const;
  std::size_t size() const { return exponents.size() - excluded.size(); }
};

inline constexpr int kMaxBasisDegree = 3;

/// Throws UnsupportedDegreeError for degree outside 1..3 and SetupError for
/// d < 1 or exclusions that are not basis members.
MonomialBasis monomial_basis(int dimension, int degree, const std::vector<MultiIndex>& exclusions = {});

/// C(d + p, d) - 1.
std::size_t full_basis_size(int dimension, int degree);

int total_degree(const MultiIndex& alpha);

/// "x1^2*x3" style label.
std::string monomial_label(const MultiIndex& alpha);

}  // namespace zv
