#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfosm/distributions.hpp"

namespace rfosm {

/// Random parameter vector X, backed either by marginal laws (optionally
/// coupled through a Gaussian copula with the given correlation matrix) or
/// by a matrix of realizations, one per row.
class RandomInput {
 public:
  static RandomInput from_marginals(std::vector<Distribution> marginals, std::vector<std::string> names,
                                    std::optional<Eigen::MatrixXd> correlation = std::nullopt);
  static RandomInput from_samples(Eigen::MatrixXd samples, std::vector<std::string> names);

  [[nodiscard]] std::size_t dimension() const noexcept { return names_.size(); }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] bool is_data_backed() const noexcept { return samples_.has_value(); }

  /// Throws Configuration when the input is data-backed.
  [[nodiscard]] const std::vector<Distribution>& marginals() const;
  /// Throws Configuration when the input is distribution-backed.
  [[nodiscard]] const Eigen::MatrixXd& samples() const;
  [[nodiscard]] const std::optional<Eigen::MatrixXd>& correlation() const noexcept { return correlation_; }

  /// True when some off-diagonal covariance entry is nonzero. Data-backed
  /// inputs of dimension > 1 always count as correlated.
  [[nodiscard]] bool is_correlated() const;

  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  /// cov(X_i, X_j); analytic for marginals (rho_ij * sd_i * sd_j), 1/(n-1)
  /// sample covariance for data.
  [[nodiscard]] const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }

  /// Per-coordinate central moments through order four (analytic for
  /// marginals, sample estimates for data).
  [[nodiscard]] std::vector<MomentSet> marginal_moments() const;

  /// `count` realizations, one per row. Distribution-backed inputs draw
  /// fresh samples for `seed`; data-backed inputs return their first
  /// `count` rows and reject count > rows.
  [[nodiscard]] Eigen::MatrixXd realizations(std::size_t count, std::uint64_t seed) const;

 private:
  RandomInput() = default;

  std::vector<std::string> names_;
  std::vector<Distribution> marginals_;
  std::optional<Eigen::MatrixXd> correlation_;
  std::optional<Eigen::MatrixXd> samples_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd copula_factor_;
};

/// Throws Validation unless `m` is square, symmetric and positive
/// semidefinite within `tol`.
void require_symmetric_psd(const Eigen::MatrixXd& m, double tol, const char* what);

}  // namespace rfosm
