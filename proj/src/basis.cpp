#include "zvmcmc/basis.hpp"

#include "zvmcmc/types.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace zv {
namespace {

// All exponent vectors of total degree `degree`, lexicographically descending.
void enumerate_degree(int dimension, int remaining, int position, MultiIndex& current,
                      std::vector<MultiIndex>& out) {
  if (position == dimension - 1) {
    current[position] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[position] = e;
    enumerate_degree(dimension, remaining - e, position + 1, current, out);
  }
  current[position] = 0;
}

}  // namespace

int total_degree(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

std::vector<MultiIndex> MonomialBasis::active() const {
  std::vector<MultiIndex> out;
  out.reserve(size());
  for (const auto& alpha : exponents)
    if (std::find(excluded.begin(), excluded.end(), alpha) == excluded.end()) out.push_back(alpha);
  return out;
}

MonomialBasis monomial_basis(int dimension, int degree, const std::vector<MultiIndex>& exclusions) {
  if (degree < 1 || degree > kMaxBasisDegree) {
    std::ostringstream os;
    os << "unsupported polynomial degree " << degree << " (supported degrees: 1, 2, 3)";
    throw UnsupportedDegreeError(os.str());
  }
  if (dimension < 1) throw SetupError("monomial basis needs dimension >= 1");

  MonomialBasis basis;
  basis.dimension = dimension;
  basis.degree = degree;
  MultiIndex current(dimension, 0);
  for (int p = 1; p <= degree; ++p) enumerate_degree(dimension, p, 0, current, basis.exponents);

  for (const auto& alpha : exclusions) {
    if (std::find(basis.exponents.begin(), basis.exponents.end(), alpha) == basis.exponents.end()) {
      // Exclusions of higher degree than the basis are simply inapplicable.
      if (static_cast<int>(alpha.size()) == dimension && total_degree(alpha) > degree &&
          std::all_of(alpha.begin(), alpha.end(), [](int e) { return e >= 0; }))
        continue;
      throw SetupError("exclusion " + monomial_label(alpha) + " is not a monomial of the basis");
    }
    if (std::find(basis.excluded.begin(), basis.excluded.end(), alpha) == basis.excluded.end())
      basis.excluded.push_back(alpha);
  }
  return basis;
}

std::size_t full_basis_size(int dimension, int degree) {
  // C(d + p, p) computed incrementally; exact in integers
  std::size_t c = 1;
  for (int k = 1; k <= degree; ++k) c = c * static_cast<std::size_t>(dimension + k) / static_cast<std::size_t>(k);
  return c - 1;
}

std::string monomial_label(const MultiIndex& alpha) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0) continue;
    if (!first) os << '*';
    os << 'x' << j + 1;
    if (alpha[j] > 1) os << '^' << alpha[j];
    first = false;
  }
  if (first) os << '1';
  return os.str();
}

}  // namespace zv
