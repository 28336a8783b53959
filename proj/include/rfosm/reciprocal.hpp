#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "rfosm/distributions.hpp"
#include "rfosm/random_input.hpp"

namespace rfosm {

enum class ReciprocalSource { AnalyticPair, Quadrature, Empirical, Sampled };

[[nodiscard]] std::string_view to_string(ReciprocalSource source) noexcept;

/// Mean vector and covariance of Z with Z_i = 1 / X_i.
struct ReciprocalMoments {
  Eigen::VectorXd mean_z;
  Eigen::MatrixXd cov_z;
  ReciprocalSource source = ReciprocalSource::Quadrature;

  struct Diagnostics {
    std::optional<double> quadrature_residual;
    std::optional<std::size_t> evaluations;
    std::optional<std::size_t> sample_count;
  } diagnostics;

  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(mean_z.size()); }
};

/// Density of Z = 1/X: z -> f_X(1/z) / z^2 for z > 0, zero elsewhere.
/// Throws UnsupportedSupport if the support of X reaches below zero.
[[nodiscard]] std::function<double(double)> reciprocal_pdf(const Distribution& dist);

/// Scalar reciprocal moments by adaptive quadrature over z in (0, inf):
///   mean_z = int f_X(1/z)/z dz,  var_z = int (z - mean_z)^2 f_X(1/z)/z^2 dz
/// with relative tolerance 1e-9. The range is split at 1/mode(X).
[[nodiscard]] ReciprocalMoments reciprocal_moments_quadrature(const Distribution& dist);

/// Exact law of 1/X when a known pair applies (X ~ c*F(m,n) gives
/// 1/X ~ (1/c)*F(n,m)); empty otherwise.
[[nodiscard]] std::optional<Distribution> reciprocal_analytic(const Distribution& dist);

/// Analytic pair when available, quadrature otherwise.
[[nodiscard]] ReciprocalMoments reciprocal_moments(const Distribution& dist);

/// Empirical mean and unbiased covariance of z = 1/x over realizations
/// (one per row). Every column must be of one sign without zeros.
[[nodiscard]] ReciprocalMoments empirical_reciprocal_moments(const Eigen::MatrixXd& samples);

/// Draws `count` realizations of `input` and estimates the moments of Z
/// empirically. Covers correlated inputs.
[[nodiscard]] ReciprocalMoments sampled_reciprocal_moments(const RandomInput& input, std::size_t count,
                                                           std::uint64_t seed);

/// Moments of Z for a whole input: data-backed inputs use the empirical
/// estimator; independent marginals are combined coordinate by coordinate.
/// Correlated marginals throw UnsupportedConfiguration (use the sampled
/// route).
[[nodiscard]] ReciprocalMoments reciprocal_moments(const RandomInput& input);

}  // namespace rfosm
