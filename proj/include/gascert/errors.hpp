#pragma once

#include <stdexcept>
#include <string>

namespace gascert {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity found in an input that must be finite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its admissible range (negative bound, zero gain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must have all eigenvalues in the open left half-plane does not.
class NotHurwitzError : public Error {
 public:
  using Error::Error;
};

/// The Hamiltonian has eigenvalues on the imaginary axis, so the distance
/// condition fails and no stabilizing Riccati solution exists.
class NotHyperbolicError : public Error {
 public:
  using Error::Error;
};

/// Numerically singular basis or solve (e.g. U block of the invariant subspace).
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gascert
