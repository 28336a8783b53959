#include "rfosm/random_input.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rfosm/error.hpp"
#include "rfosm/numerics.hpp"

namespace rfosm {

namespace {

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Sample central moments of one column (1/n normalization for mu3/mu4,
// 1/(n-1) for the variance).
MomentSet column_moments(const Eigen::MatrixXd& data, Eigen::Index col) {
  const auto n = static_cast<double>(data.rows());
  MomentSet m;
  m.exactness = Exactness::Sampled;
  m.sample_count = static_cast<std::size_t>(data.rows());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < data.rows(); ++k) sum += data(k, col);
  m.mean = sum / n;
  double s2 = 0.0;
  double s3 = 0.0;
  double s4 = 0.0;
  for (Eigen::Index k = 0; k < data.rows(); ++k) {
    const double d = data(k, col) - m.mean;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  m.variance = s2 / (n - 1.0);
  m.mu3 = s3 / n;
  m.mu4 = s4 / n;
  return m;
}

}  // namespace

void require_symmetric_psd(const Eigen::MatrixXd& m, double tol, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::Validation, std::string(what) + " must be square");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::Validation, std::string(what) + " has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > tol * scale) {
    throw Error(ErrorKind::Validation, std::string(what) + " is not symmetric");
  }
  if (m.rows() == 0) return;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.eigenvalues().minCoeff() < -tol * scale) {
    std::ostringstream msg;
    msg << what << " is not positive semidefinite (min eigenvalue " << eig.eigenvalues().minCoeff() << ")";
    throw Error(ErrorKind::Validation, msg.str());
  }
}

RandomInput RandomInput::from_marginals(std::vector<Distribution> marginals, std::vector<std::string> names,
                                        std::optional<Eigen::MatrixXd> correlation) {
  if (marginals.empty()) throw Error(ErrorKind::Validation, "random input needs at least one parameter");
  if (names.size() != marginals.size()) {
    throw Error(ErrorKind::Validation, "number of names does not match number of marginals");
  }
  const auto n = static_cast<Eigen::Index>(marginals.size());
  RandomInput in;
  in.names_ = std::move(names);
  in.marginals_ = std::move(marginals);
  in.mean_.resize(n);
  Eigen::VectorXd sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MomentSet m = moments(in.marginals_[static_cast<std::size_t>(i)]);
    in.mean_[i] = m.mean;
    sd[i] = m.sd();
  }
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(n, n);
  if (correlation) {
    if (correlation->rows() != n || correlation->cols() != n) {
      throw Error(ErrorKind::Validation, "correlation matrix dimension does not match marginals");
    }
    require_symmetric_psd(*correlation, 1e-10, "correlation matrix");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs((*correlation)(i, i) - 1.0) > 1e-12) {
        throw Error(ErrorKind::Validation, "correlation matrix must have a unit diagonal");
      }
    }
    rho = *correlation;
    // Symmetric square root handles semidefinite matrices too.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(rho);
    in.copula_factor_ = eig.eigenvectors() *
                        eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                        eig.eigenvectors().transpose();
    in.correlation_ = std::move(correlation);
  }
  in.covariance_ = sd.asDiagonal() * rho * sd.asDiagonal();
  return in;
}

RandomInput RandomInput::from_samples(Eigen::MatrixXd samples, std::vector<std::string> names) {
  if (samples.cols() == 0) throw Error(ErrorKind::Validation, "sample matrix has no columns");
  if (static_cast<std::size_t>(samples.cols()) != names.size()) {
    throw Error(ErrorKind::Validation, "number of names does not match sample columns");
  }
  if (!samples.allFinite()) throw Error(ErrorKind::Validation, "sample matrix has non-finite entries");
  const numerics::SampleMoments sm = numerics::sample_mean_covariance(samples);
  RandomInput in;
  in.names_ = std::move(names);
  in.mean_ = sm.mean;
  in.covariance_ = sm.covariance;
  in.samples_ = std::move(samples);
  return in;
}

const std::vector<Distribution>& RandomInput::marginals() const {
  if (is_data_backed()) throw Error(ErrorKind::Configuration, "input is data-backed; no marginal laws");
  return marginals_;
}

const Eigen::MatrixXd& RandomInput::samples() const {
  if (!is_data_backed()) throw Error(ErrorKind::Configuration, "input is distribution-backed; no samples");
  return *samples_;
}

bool RandomInput::is_correlated() const {
  const Eigen::Index n = covariance_.rows();
  if (is_data_backed()) return n > 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && covariance_(i, j) != 0.0) return true;
    }
  }
  return false;
}

std::vector<MomentSet> RandomInput::marginal_moments() const {
  std::vector<MomentSet> out;
  if (is_data_backed()) {
    for (Eigen::Index c = 0; c < samples_->cols(); ++c) out.push_back(column_moments(*samples_, c));
  } else {
    for (const auto& d : marginals_) out.push_back(moments(d));
  }
  return out;
}

Eigen::MatrixXd RandomInput::realizations(std::size_t count, std::uint64_t seed) const {
  if (count == 0) throw Error(ErrorKind::Validation, "realization count must be at least 1");
  const auto n = static_cast<Eigen::Index>(dimension());
  const auto rows = static_cast<Eigen::Index>(count);
  if (is_data_backed()) {
    if (rows > samples_->rows()) {
      std::ostringstream msg;
      msg << "requested " << count << " realizations but the data has only " << samples_->rows() << " rows";
      throw Error(ErrorKind::Validation, msg.str());
    }
    return samples_->topRows(rows);
  }

  Eigen::MatrixXd out(rows, n);
  Rng rng(seed);
  if (!correlation_) {
    for (Eigen::Index k = 0; k < rows; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) out(k, i) = draw(marginals_[static_cast<std::size_t>(i)], rng);
    }
    return out;
  }

  // Gaussian copula: correlated standard normals mapped through each
  // marginal's quantile function.
  std::normal_distribution<double> normal;
  Eigen::VectorXd g(n);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) g[i] = normal(rng);
    const Eigen::VectorXd y = copula_factor_ * g;
    for (Eigen::Index i = 0; i < n; ++i) {
      double u = standard_normal_cdf(y[i]);
      u = std::min(std::max(u, 0x1.0p-60), 1.0 - 0x1.0p-53);
      out(k, i) = inverse_cdf(marginals_[static_cast<std::size_t>(i)], u);
    }
  }
  return out;
}

}  // namespace rfosm
