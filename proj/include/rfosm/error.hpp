#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfosm {

enum class ErrorKind {
  ParameterDomain,
  NonexistentMoment,
  Domain,
  DivisionDomain,
  UnsupportedSupport,
  EstimatorUndefined,
  QuadratureFailure,
  Bracket,
  Numeric,
  Model,
  UnsupportedConfiguration,
  Configuration,
  Validation,
  Parse,
  Io,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` carries the category so
/// the CLI can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Quadrature failure keeps the partial result around for diagnostics.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& message, double partial_value, double residual)
      : Error(ErrorKind::QuadratureFailure, message),
        partial_value_(partial_value),
        residual_(residual) {}

  [[nodiscard]] double partial_value() const noexcept { return partial_value_; }
  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double partial_value_;
  double residual_;
};

}  // namespace rfosm
