#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfosm/propagation.hpp"

namespace rfosm::beam {

/// Cantilever with rectangular section. Units: kN, mm, kN/mm^2.
struct BeamParams {
  double F = 0.1;     // tip load
  double L = 1000.0;  // length
  double E = 70.0;    // Young's modulus
  double h = 30.0;    // section height
  double b = 30.0;    // section width

  /// Throws ParameterDomain unless every entry is strictly positive.
  void validate() const;

  [[nodiscard]] double get(std::string_view name) const;
  void set(std::string_view name, double value);
};

inline constexpr std::array<std::string_view, 5> kParameterNames = {"F", "L", "E", "h", "b"};

/// w = 4 F L^3 / (E h^3 b)
[[nodiscard]] double tip_deflection(const BeamParams& p);

/// Tip deflection as a function of the named parameters; the rest stay at
/// `nominal`. Gradient and Hessian are analytic: w is a monomial, so
/// dw/dp_i = e_i w / p_i and d2w/dp_i dp_j = e_i (e_j - [i==j]) w / (p_i p_j)
/// with exponents F:+1, L:+3, E:-1, h:-3, b:-1.
[[nodiscard]] ObjectiveModel tip_deflection_model(const BeamParams& nominal,
                                                  const std::vector<std::string>& random_names);

}  // namespace rfosm::beam
