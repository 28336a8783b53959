#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rfosm/random_input.hpp"
#include "rfosm/reciprocal.hpp"

namespace rfosm {

/// Scalar objective g(x). `gradient` and `hessian` may be left empty, in
/// which case central finite differences are used.
struct ObjectiveModel {
  std::size_t dimension = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
  /// Monte Carlo may evaluate draws on several threads when set.
  bool concurrent_safe = false;

  [[nodiscard]] double evaluate(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd evaluate_gradient(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const;
};

enum class Method { FOSM, SOFM, RecFOSM, MonteCarlo };

[[nodiscard]] std::string_view to_string(Method method) noexcept;
/// Keys: "fosm", "sofm", "recfosm", "mc".
[[nodiscard]] Method method_from_string(std::string_view key);

struct MomentEstimate {
  double mean = 0.0;
  double sd = 0.0;
  Method method = Method::FOSM;

  struct Meta {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> sample_count;
    std::optional<double> se_mean;
    std::optional<double> se_sd;
    std::optional<ReciprocalSource> reciprocal_source;
    std::optional<double> quadrature_residual;
  } meta;
};

/// First-order second-moment estimate at the input mean:
///   mean = g(mu_X),  sd^2 = sum_ij dg/dx_i dg/dx_j cov(X_i, X_j).
[[nodiscard]] MomentEstimate fosm(const ObjectiveModel& model, const RandomInput& input);

/// Second-order estimate for independent inputs using the Hessian
/// diagonal and third/fourth central moments:
///   mean = g + 1/2 sum_i g_ii var_i
///   sd^2 = sum_i g_i^2 var_i + sum_i g_i g_ii mu3_i + 1/4 sum_i g_ii^2 (mu4_i - var_i^2)
[[nodiscard]] MomentEstimate sofm(const ObjectiveModel& model, const RandomInput& input);

/// Reciprocal first-order estimate with every coordinate substituted by
/// z_i = 1/x_i. g and its gradient are evaluated once, at x_i = 1/mu_Z_i.
[[nodiscard]] MomentEstimate rec_fosm(const ObjectiveModel& model, const ReciprocalMoments& recip);

/// Moments of the partially substituted vector y, where y_i = 1/x_i for
/// substituted coordinates and y_i = x_i otherwise.
struct SubstitutedMoments {
  std::vector<bool> substituted;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::optional<ReciprocalSource> source;
  std::optional<double> quadrature_residual;
};

struct SamplingOptions {
  std::size_t count = 100'000;
  std::uint64_t seed = 0;
};

/// Data-backed inputs are transformed column-wise and estimated
/// empirically. Independent marginals use reciprocal moments for the
/// substituted coordinates and plain moments for the rest. Correlation that
/// couples a substituted coordinate to anything else needs `sampling`
/// (UnsupportedConfiguration otherwise).
[[nodiscard]] SubstitutedMoments substituted_moments(const RandomInput& input, const std::vector<bool>& substituted,
                                                     std::optional<SamplingOptions> sampling = std::nullopt);

/// Reciprocal FOSM over a partially substituted vector.
[[nodiscard]] MomentEstimate rec_fosm(const ObjectiveModel& model, const SubstitutedMoments& moments);

/// Plain Monte Carlo over `count` realizations of `input`. Data-backed
/// inputs use their first `count` rows.
[[nodiscard]] MomentEstimate monte_carlo(const ObjectiveModel& model, const RandomInput& input, std::size_t count,
                                         std::uint64_t seed);

}  // namespace rfosm
