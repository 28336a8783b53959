#include "rfosm/error.hpp"

namespace rfosm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ParameterDomain: return "parameter_domain";
    case ErrorKind::NonexistentMoment: return "nonexistent_moment";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::DivisionDomain: return "division_domain";
    case ErrorKind::UnsupportedSupport: return "unsupported_support";
    case ErrorKind::EstimatorUndefined: return "estimator_undefined";
    case ErrorKind::QuadratureFailure: return "quadrature_failure";
    case ErrorKind::Bracket: return "bracket";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Model: return "model";
    case ErrorKind::UnsupportedConfiguration: return "unsupported_configuration";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace rfosm
