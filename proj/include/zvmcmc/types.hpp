#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace zv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point in the model's parameter space (chain state).
using ParamVector = Eigen::VectorXd;

/// Input outside the support of a model, or an invalid numeric argument.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent shapes or configurations detected before any work starts.
class SetupError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too few samples for the requested estimate.
class InsufficientSampleError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed or invalid input file.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unsupported polynomial degree for the monomial basis.
class UnsupportedDegreeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runtime failure inside a sampler (e.g. non-finite log-density).
class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Eigen::Ref<const Vector>& v) { return v.allFinite(); }

}  // namespace zv
