#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace regen {

/// Base class for failures of a mathematical precondition.
///
/// Every error carries a short machine-readable code (e.g. "divergent-moment")
/// that the command-line front end echoes in its structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Argument outside the domain of an operation (p outside [0,1), t <= 0, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

/// F(b) is numerically 1: hazard or residual distribution undefined.
class SaturationError : public Error {
 public:
  explicit SaturationError(const std::string& what) : Error("saturation", what) {}
};

/// A requested moment (or moment generating function value) is infinite.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error("divergent-moment", what) {}
};

/// Two densities share no mass.
class NoOverlapError : public Error {
 public:
  explicit NoOverlapError(const std::string& what) : Error("no-overlap", what) {}
};

/// Two densities coincide a.e.; the residual parts of a decomposition are undefined.
class DegenerateDecomposition : public Error {
 public:
  explicit DegenerateDecomposition(const std::string& what)
      : Error("degenerate-decomposition", what) {}
};

/// The per-attempt overlap kappa(theta) is too small for a usable bound.
class VanishingOverlapError : public Error {
 public:
  explicit VanishingOverlapError(const std::string& what) : Error("vanishing-overlap", what) {}
};

/// No beta in (0, alpha) satisfies (1 - varkappa) * E exp(beta xi) < 1.
class ExponentialBoundUnavailable : public Error {
 public:
  explicit ExponentialBoundUnavailable(const std::string& what)
      : Error("no-admissible-beta", what) {}
};

/// Query outside the simulated horizon of a path.
class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error("range", what) {}
};

/// Internal consistency check failed (e.g. reference bin masses do not sum to one).
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error("internal", what) {}
};

/// Malformed model or run configuration. `field()` names the offending entry.
class InvalidParameter : public std::invalid_argument {
 public:
  InvalidParameter(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace regen
