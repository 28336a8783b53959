#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Core>
#include <Eigen/Dense>

namespace rfosm::numerics {

using ScalarFunction = std::function<double(double)>;
using VectorFunction = std::function<double(const Eigen::VectorXd&)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_residual = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr std::size_t kDefaultEvaluationBudget = 1'000'000;

/// Globally adaptive 15-point Gauss-Kronrod on [lo, hi].
/// Throws QuadratureError when the residual cannot be pushed below
/// `tol_rel * |value|` within the evaluation budget.
[[nodiscard]] QuadratureResult integrate(const ScalarFunction& f, double lo, double hi,
                                         double tol_rel,
                                         std::size_t budget = kDefaultEvaluationBudget);

/// Integral over (0, inf). The range is split at `split` (> 0); [0, split] is
/// integrated directly and the tail through z = split + t/(1-t), t in [0,1).
[[nodiscard]] QuadratureResult integrate_semi_infinite(
    const ScalarFunction& f, double tol_rel, double split = 1.0,
    std::size_t budget = kDefaultEvaluationBudget);

/// Brent-style bisection/secant hybrid. Requires f(lo)*f(hi) <= 0.
[[nodiscard]] double find_root_bracketed(const ScalarFunction& f, double lo, double hi,
                                         double tol);

enum class DiffOrder { Gradient, HessianDiagonal };

// Relative central-difference steps.
[[nodiscard]] inline double gradient_step(double x) {
  return std::max(1e-6, 1e-6 * std::abs(x));
}
[[nodiscard]] inline double hessian_step(double x) {
  return std::max(1e-4, 1e-4 * std::abs(x));
}

/// Central differences of f at x: either the gradient or the diagonal of
/// the Hessian. Throws Model error on a non-finite evaluation.
[[nodiscard]] Eigen::VectorXd finite_diff(const VectorFunction& f, const Eigen::VectorXd& x,
                                          DiffOrder order);

struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Column means and the unbiased (1/(n-1)) covariance of a realization
/// matrix (one realization per row), by plain two-pass accumulation in row
/// order. Throws EstimatorUndefined for fewer than two rows.
[[nodiscard]] SampleMoments sample_mean_covariance(const Eigen::MatrixXd& rows);

/// Pairwise summation; result does not depend on how the input was produced.
[[nodiscard]] double pairwise_sum(std::span<const double> values);

}  // namespace rfosm::numerics
