#include "rfosm/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "rfosm/error.hpp"
#include "rfosm/numerics.hpp"

namespace rfosm {

namespace {

void require_dimension(const ObjectiveModel& model, std::size_t n) {
  if (!model.value) throw Error(ErrorKind::Model, "objective model has no value function");
  if (model.dimension != n) {
    std::ostringstream msg;
    msg << "model dimension " << model.dimension << " does not match input dimension " << n;
    throw Error(ErrorKind::Validation, msg.str());
  }
}

double quadratic_form(const Eigen::VectorXd& d, const Eigen::MatrixXd& cov) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    for (Eigen::Index j = 0; j < d.size(); ++j) acc += (d[i] * d[j]) * cov(i, j);
  }
  return acc;
}

double checked_sd(double variance) {
  if (variance < 0.0) {
    if (variance > -1e-14) return 0.0;
    std::ostringstream msg;
    msg << "negative variance estimate " << variance;
    throw Error(ErrorKind::Numeric, msg.str());
  }
  return std::sqrt(variance);
}

}  // namespace

double ObjectiveModel::evaluate(const Eigen::VectorXd& x) const {
  const double y = value(x);
  if (!std::isfinite(y)) {
    std::ostringstream msg;
    msg << "model value is not finite at [" << x.transpose() << "]";
    throw Error(ErrorKind::Model, msg.str());
  }
  return y;
}

Eigen::VectorXd ObjectiveModel::evaluate_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = gradient ? gradient(x) : numerics::finite_diff(value, x, numerics::DiffOrder::Gradient);
  if (static_cast<std::size_t>(g.size()) != dimension || !g.allFinite()) {
    throw Error(ErrorKind::Model, "model gradient has the wrong size or non-finite entries");
  }
  return g;
}

Eigen::VectorXd ObjectiveModel::hessian_diagonal(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h;
  if (hessian) {
    const Eigen::MatrixXd full = hessian(x);
    if (static_cast<std::size_t>(full.rows()) != dimension || full.rows() != full.cols()) {
      throw Error(ErrorKind::Model, "model Hessian has the wrong shape");
    }
    h = full.diagonal();
  } else {
    h = numerics::finite_diff(value, x, numerics::DiffOrder::HessianDiagonal);
  }
  if (!h.allFinite()) throw Error(ErrorKind::Model, "model Hessian has non-finite entries");
  return h;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::FOSM: return "fosm";
    case Method::SOFM: return "sofm";
    case Method::RecFOSM: return "recfosm";
    case Method::MonteCarlo: return "mc";
  }
  return "unknown";
}

Method method_from_string(std::string_view key) {
  for (Method m : {Method::FOSM, Method::SOFM, Method::RecFOSM, Method::MonteCarlo}) {
    if (key == to_string(m)) return m;
  }
  throw Error(ErrorKind::Validation, "unknown method '" + std::string(key) + "'");
}

MomentEstimate fosm(const ObjectiveModel& model, const RandomInput& input) {
  require_dimension(model, input.dimension());
  const Eigen::VectorXd& mu = input.mean();
  MomentEstimate out;
  out.method = Method::FOSM;
  out.mean = model.evaluate(mu);
  out.sd = checked_sd(quadratic_form(model.evaluate_gradient(mu), input.covariance()));
  return out;
}

MomentEstimate sofm(const ObjectiveModel& model, const RandomInput& input) {
  require_dimension(model, input.dimension());
  if (input.is_correlated()) {
    throw Error(ErrorKind::UnsupportedConfiguration, "sofm supports independent inputs only");
  }
  const std::vector<MomentSet> m = input.marginal_moments();
  const Eigen::VectorXd& mu = input.mean();
  const Eigen::MatrixXd& cov = input.covariance();
  const double g = model.evaluate(mu);
  const Eigen::VectorXd grad = model.evaluate_gradient(mu);
  const Eigen::VectorXd h = model.hessian_diagonal(mu);

  double mean_shift = 0.0;
  double variance = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    mean_shift += 0.5 * h[i] * cov(i, i);
    variance += (grad[i] * grad[i]) * cov(i, i);
  }
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const auto& mi = m[static_cast<std::size_t>(i)];
    const double var = cov(i, i);
    variance += grad[i] * h[i] * mi.third();
    variance += 0.25 * (h[i] * h[i]) * (mi.fourth() - var * var);
  }
  MomentEstimate out;
  out.method = Method::SOFM;
  out.mean = g + mean_shift;
  out.sd = checked_sd(variance);
  return out;
}

MomentEstimate rec_fosm(const ObjectiveModel& model, const SubstitutedMoments& moments) {
  const auto n = static_cast<std::size_t>(moments.mean.size());
  require_dimension(model, n);
  if (moments.substituted.size() != n || moments.covariance.rows() != moments.mean.size() ||
      moments.covariance.cols() != moments.mean.size()) {
    throw Error(ErrorKind::Validation, "substituted moments have inconsistent dimensions");
  }
  Eigen::VectorXd point(moments.mean.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double mu = moments.mean[i];
    if (moments.substituted[static_cast<std::size_t>(i)]) {
      if (mu == 0.0) {
        std::ostringstream msg;
        msg << "mean of reciprocal coordinate " << i << " is zero";
        throw Error(ErrorKind::DivisionDomain, msg.str());
      }
      point[i] = 1.0 / mu;
    } else {
      point[i] = mu;
    }
  }
  MomentEstimate out;
  out.method = Method::RecFOSM;
  out.mean = model.evaluate(point);
  Eigen::VectorXd dg = model.evaluate_gradient(point);
  for (Eigen::Index i = 0; i < dg.size(); ++i) {
    if (moments.substituted[static_cast<std::size_t>(i)]) {
      const double mu = moments.mean[i];
      dg[i] *= -1.0 / (mu * mu);
    }
  }
  out.sd = checked_sd(quadratic_form(dg, moments.covariance));
  out.meta.reciprocal_source = moments.source;
  out.meta.quadrature_residual = moments.quadrature_residual;
  return out;
}

MomentEstimate rec_fosm(const ObjectiveModel& model, const ReciprocalMoments& recip) {
  SubstitutedMoments all;
  all.substituted.assign(recip.dimension(), true);
  all.mean = recip.mean_z;
  all.covariance = recip.cov_z;
  all.source = recip.source;
  all.quadrature_residual = recip.diagnostics.quadrature_residual;
  MomentEstimate out = rec_fosm(model, all);
  if (recip.diagnostics.sample_count) out.meta.sample_count = recip.diagnostics.sample_count;
  return out;
}

SubstitutedMoments substituted_moments(const RandomInput& input, const std::vector<bool>& substituted,
                                       std::optional<SamplingOptions> sampling) {
  const std::size_t n = input.dimension();
  if (substituted.size() != n) {
    throw Error(ErrorKind::Validation, "substitution mask does not match input dimension");
  }
  const auto empirical = [&](const Eigen::MatrixXd& rows, ReciprocalSource source) {
    Eigen::MatrixXd y = rows;
    std::vector<Eigen::Index> cols;
    for (std::size_t i = 0; i < n; ++i) {
      if (substituted[i]) cols.push_back(static_cast<Eigen::Index>(i));
    }
    if (!cols.empty()) {
      Eigen::MatrixXd x_sub(rows.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) x_sub.col(static_cast<Eigen::Index>(c)) = rows.col(cols[c]);
      // validates zeros / signs with the same diagnostics as the Z estimator
      (void)empirical_reciprocal_moments(x_sub);
      for (Eigen::Index c : cols) y.col(c) = y.col(c).cwiseInverse();
    }
    const numerics::SampleMoments sm = numerics::sample_mean_covariance(y);
    SubstitutedMoments out{substituted, sm.mean, sm.covariance, source, std::nullopt};
    return out;
  };

  if (input.is_data_backed()) return empirical(input.samples(), ReciprocalSource::Empirical);

  const Eigen::MatrixXd& cov = input.covariance();
  bool coupled = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (substituted[i] || substituted[j]) &&
          cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) {
        coupled = true;
      }
    }
  }
  if (coupled) {
    if (!sampling) {
      throw Error(ErrorKind::UnsupportedConfiguration,
                  "substituted coordinates are correlated with others; use the sampled route");
    }
    return empirical(input.realizations(sampling->count, sampling->seed), ReciprocalSource::Sampled);
  }

  SubstitutedMoments out;
  out.substituted = substituted;
  out.mean = input.mean();
  out.covariance = cov;
  bool any_quadrature = false;
  bool any_substituted = false;
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!substituted[i]) continue;
    any_substituted = true;
    const auto idx = static_cast<Eigen::Index>(i);
    const ReciprocalMoments r = reciprocal_moments(input.marginals()[i]);
    out.mean[idx] = r.mean_z[0];
    out.covariance(idx, idx) = r.cov_z(0, 0);
    if (r.source == ReciprocalSource::Quadrature) {
      any_quadrature = true;
      residual += r.diagnostics.quadrature_residual.value_or(0.0);
    }
  }
  if (any_substituted) {
    out.source = any_quadrature ? ReciprocalSource::Quadrature : ReciprocalSource::AnalyticPair;
  }
  if (any_quadrature) out.quadrature_residual = residual;
  return out;
}

MomentEstimate monte_carlo(const ObjectiveModel& model, const RandomInput& input, std::size_t count,
                           std::uint64_t seed) {
  require_dimension(model, input.dimension());
  if (count < 2) throw Error(ErrorKind::EstimatorUndefined, "monte carlo needs at least 2 draws");
  const Eigen::MatrixXd draws = input.realizations(count, seed);

  std::vector<double> values(count);
  const auto evaluate_range = [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd x(draws.cols());
    for (std::size_t k = begin; k < end; ++k) {
      x = draws.row(static_cast<Eigen::Index>(k)).transpose();
      const double y = model.value(x);
      if (!std::isfinite(y)) {
        std::ostringstream msg;
        msg << "model evaluation failed on draw " << k << " at [" << x.transpose() << "]";
        throw Error(ErrorKind::Model, msg.str());
      }
      values[k] = y;
    }
  };

  const std::size_t workers =
      model.concurrent_safe ? std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), 8) : 1;
  if (workers <= 1 || count < 10'000) {
    evaluate_range(0, count);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (count + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
          try {
            if (begin < end) evaluate_range(begin, end);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const double n = static_cast<double>(count);
  const double mean = numerics::pairwise_sum(values) / n;
  std::vector<double> dev2(count);
  std::vector<double> dev4(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double d = values[k] - mean;
    dev2[k] = d * d;
    dev4[k] = dev2[k] * dev2[k];
  }
  const double variance = numerics::pairwise_sum(dev2) / (n - 1.0);
  const double m4 = numerics::pairwise_sum(dev4) / n;

  MomentEstimate out;
  out.method = Method::MonteCarlo;
  out.mean = mean;
  out.sd = std::sqrt(variance);
  out.meta.seed = input.is_data_backed() ? std::nullopt : std::optional<std::uint64_t>(seed);
  out.meta.sample_count = count;
  out.meta.se_mean = out.sd / std::sqrt(n);
  // var(s^2) ~ (m4 - s^4) / n, then delta method for s.
  const double var_of_var = std::max(0.0, m4 - variance * variance) / n;
  out.meta.se_sd = out.sd > 0.0 ? std::sqrt(var_of_var) / (2.0 * out.sd) : 0.0;
  return out;
}

}  // namespace rfosm
