#include "rfosm/reciprocal.hpp"

#include <cmath>
#include <sstream>

#include "rfosm/error.hpp"
#include "rfosm/numerics.hpp"

namespace rfosm {

namespace {

constexpr double kQuadratureTolerance = 1e-9;

void require_positive_support(const Distribution& dist) {
  const auto [lo, hi] = dist.support();
  if (lo < 0.0) {
    std::ostringstream msg;
    msg << to_string(dist.family()) << ": support [" << lo << ", " << hi
        << "] reaches below zero; moments of 1/X do not exist";
    throw Error(ErrorKind::UnsupportedSupport, msg.str());
  }
}

}  // namespace

std::string_view to_string(ReciprocalSource source) noexcept {
  switch (source) {
    case ReciprocalSource::AnalyticPair: return "analytic_pair";
    case ReciprocalSource::Quadrature: return "quadrature";
    case ReciprocalSource::Empirical: return "empirical";
    case ReciprocalSource::Sampled: return "sampled";
  }
  return "unknown";
}

std::function<double(double)> reciprocal_pdf(const Distribution& dist) {
  require_positive_support(dist);
  return [dist](double z) {
    if (!(z > 0.0)) return 0.0;
    const double x = 1.0 / z;
    return pdf(dist, x) * x * x;
  };
}

ReciprocalMoments reciprocal_moments_quadrature(const Distribution& dist) {
  require_positive_support(dist);
  double mode = dist.mode();
  if (!(mode > 0.0)) mode = moments(dist).mean;
  const double split = 1.0 / mode;

  const auto density = [&dist](double x) { return pdf(dist, x); };
  const auto mean_part = numerics::integrate_semi_infinite(
      [&](double z) {
        const double x = 1.0 / z;
        return density(x) * x;
      },
      kQuadratureTolerance, split);
  const double mean_z = mean_part.value;
  const auto var_part = numerics::integrate_semi_infinite(
      [&](double z) {
        const double x = 1.0 / z;
        const double d = z - mean_z;
        return d * d * density(x) * x * x;
      },
      kQuadratureTolerance, split);

  ReciprocalMoments out;
  out.mean_z = Eigen::VectorXd::Constant(1, mean_z);
  out.cov_z = Eigen::MatrixXd::Constant(1, 1, var_part.value);
  out.source = ReciprocalSource::Quadrature;
  out.diagnostics.quadrature_residual = mean_part.abs_residual + var_part.abs_residual;
  out.diagnostics.evaluations = mean_part.evaluations + var_part.evaluations;
  return out;
}

std::optional<Distribution> reciprocal_analytic(const Distribution& dist) {
  if (dist.family() == Family::FisherF && dist.shift() == 0.0) {
    const auto [m, n] = dist.params();
    return Distribution::fisher_f(n, m, 1.0 / dist.scale());
  }
  return std::nullopt;
}

ReciprocalMoments reciprocal_moments(const Distribution& dist) {
  if (const auto pair = reciprocal_analytic(dist)) {
    const MomentSet m = moments(*pair);
    ReciprocalMoments out;
    out.mean_z = Eigen::VectorXd::Constant(1, m.mean);
    out.cov_z = Eigen::MatrixXd::Constant(1, 1, m.variance);
    out.source = ReciprocalSource::AnalyticPair;
    return out;
  }
  return reciprocal_moments_quadrature(dist);
}

ReciprocalMoments empirical_reciprocal_moments(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2) {
    throw Error(ErrorKind::EstimatorUndefined,
                "reciprocal covariance needs at least 2 realizations, got " + std::to_string(samples.rows()));
  }
  Eigen::MatrixXd z(samples.rows(), samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    bool any_positive = false;
    bool any_negative = false;
    for (Eigen::Index k = 0; k < samples.rows(); ++k) {
      const double x = samples(k, j);
      if (x == 0.0) {
        std::ostringstream msg;
        msg << "zero entry at row " << k + 1 << ", column " << j + 1 << " cannot be inverted";
        throw Error(ErrorKind::DivisionDomain, msg.str());
      }
      if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "non-finite entry at row " << k + 1 << ", column " << j + 1;
        throw Error(ErrorKind::Validation, msg.str());
      }
      (x > 0.0 ? any_positive : any_negative) = true;
      z(k, j) = 1.0 / x;
    }
    if (any_positive && any_negative) {
      std::ostringstream msg;
      msg << "column " << j + 1 << " mixes signs; moments of 1/X do not exist";
      throw Error(ErrorKind::UnsupportedSupport, msg.str());
    }
  }
  const numerics::SampleMoments sm = numerics::sample_mean_covariance(z);
  ReciprocalMoments out;
  out.mean_z = sm.mean;
  out.cov_z = sm.covariance;
  out.source = ReciprocalSource::Empirical;
  out.diagnostics.sample_count = static_cast<std::size_t>(samples.rows());
  return out;
}

ReciprocalMoments sampled_reciprocal_moments(const RandomInput& input, std::size_t count, std::uint64_t seed) {
  if (count < 2) {
    throw Error(ErrorKind::EstimatorUndefined, "sampled reciprocal moments need at least 2 realizations");
  }
  ReciprocalMoments out = empirical_reciprocal_moments(input.realizations(count, seed));
  out.source = ReciprocalSource::Sampled;
  return out;
}

ReciprocalMoments reciprocal_moments(const RandomInput& input) {
  if (input.is_data_backed()) return empirical_reciprocal_moments(input.samples());
  if (input.is_correlated()) {
    throw Error(ErrorKind::UnsupportedConfiguration,
                "correlated marginals: reciprocal moments are only available through sampling");
  }
  const auto n = static_cast<Eigen::Index>(input.dimension());
  ReciprocalMoments out;
  out.mean_z.resize(n);
  out.cov_z = Eigen::MatrixXd::Zero(n, n);
  out.source = ReciprocalSource::AnalyticPair;
  for (Eigen::Index i = 0; i < n; ++i) {
    const ReciprocalMoments one = reciprocal_moments(input.marginals()[static_cast<std::size_t>(i)]);
    out.mean_z[i] = one.mean_z[0];
    out.cov_z(i, i) = one.cov_z(0, 0);
    if (one.source == ReciprocalSource::Quadrature) {
      out.source = ReciprocalSource::Quadrature;
      out.diagnostics.quadrature_residual =
          out.diagnostics.quadrature_residual.value_or(0.0) + *one.diagnostics.quadrature_residual;
      out.diagnostics.evaluations = out.diagnostics.evaluations.value_or(0) + *one.diagnostics.evaluations;
    }
  }
  return out;
}

}  // namespace rfosm
