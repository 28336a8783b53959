#include "rfosm/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rfosm/error.hpp"
#include "rfosm/numerics.hpp"

namespace rfosm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInverseCdfTolerance = 1e-10;

[[noreturn]] void parameter_error(std::string_view family, std::string_view detail) {
  std::ostringstream msg;
  msg << family << ": " << detail;
  throw Error(ErrorKind::ParameterDomain, msg.str());
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void validate(Family family, const std::array<double, 2>& p, double scale, double shift) {
  const auto name = to_string(family);
  if (!positive_finite(scale)) {
    parameter_error(name, "scale must be a positive finite number");
  }
  if (!std::isfinite(shift)) {
    parameter_error(name, "shift must be finite");
  }
  switch (family) {
    case Family::Normal:
      if (!std::isfinite(p[0])) parameter_error(name, "mean must be finite");
      if (!positive_finite(p[1])) parameter_error(name, "sd must be > 0");
      return;
    case Family::LogNormal:
      if (!std::isfinite(p[0])) parameter_error(name, "mu must be finite");
      if (!positive_finite(p[1])) parameter_error(name, "sigma must be > 0");
      return;
    case Family::Uniform:
      if (!(std::isfinite(p[0]) && std::isfinite(p[1]) && p[0] < p[1])) {
        parameter_error(name, "requires finite lower < upper");
      }
      return;
    case Family::Weibull:
    case Family::FisherF:
    case Family::Gamma:
      if (!positive_finite(p[0]) || !positive_finite(p[1])) {
        parameter_error(name, "parameters must be strictly positive");
      }
      return;
  }
}

// Standardized base variable: X = scale * B + shift.
double to_base(const Distribution& d, double x) { return (x - d.shift()) / d.scale(); }

double base_pdf(const Distribution& d, double x) {
  const auto [p0, p1] = d.params();
  switch (d.family()) {
    case Family::Weibull: {
      if (x < 0.0) return 0.0;
      if (x == 0.0) return p1 < 1.0 ? kInf : (p1 == 1.0 ? p0 : 0.0);
      const double log_pdf = std::log(p0) + std::log(p1) + (p1 - 1.0) * std::log(x) - p0 * std::pow(x, p1);
      return std::exp(log_pdf);
    }
    case Family::FisherF: {
      if (x < 0.0) return 0.0;
      if (x == 0.0) return p0 < 2.0 ? kInf : (p0 == 2.0 ? 1.0 : 0.0);
      const double m = p0;
      const double n = p1;
      const double log_beta = std::lgamma(0.5 * m) + std::lgamma(0.5 * n) - std::lgamma(0.5 * (m + n));
      const double log_pdf = 0.5 * m * std::log(m) + 0.5 * n * std::log(n) + (0.5 * m - 1.0) * std::log(x) -
                             0.5 * (m + n) * std::log(n + m * x) - log_beta;
      return std::exp(log_pdf);
    }
    case Family::Normal: {
      const double t = (x - p0) / p1;
      return std::exp(-0.5 * t * t) / (p1 * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::LogNormal: {
      if (x <= 0.0) return 0.0;
      const double t = (std::log(x) - p0) / p1;
      return std::exp(-0.5 * t * t) / (x * p1 * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::Gamma: {
      if (x < 0.0) return 0.0;
      if (x == 0.0) return p0 < 1.0 ? kInf : (p0 == 1.0 ? p1 : 0.0);
      const double log_pdf = p0 * std::log(p1) + (p0 - 1.0) * std::log(x) - p1 * x - std::lgamma(p0);
      return std::exp(log_pdf);
    }
    case Family::Uniform:
      return (x < p0 || x > p1) ? 0.0 : 1.0 / (p1 - p0);
  }
  return 0.0;
}

double base_cdf(const Distribution& d, double x) {
  const auto [p0, p1] = d.params();
  switch (d.family()) {
    case Family::Weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-p0 * std::pow(x, p1));
    case Family::FisherF:
      return x <= 0.0 ? 0.0 : boost::math::ibeta(0.5 * p0, 0.5 * p1, p0 * x / (p0 * x + p1));
    case Family::Normal:
      return 0.5 * std::erfc(-(x - p0) / (p1 * std::numbers::sqrt2));
    case Family::LogNormal:
      return x <= 0.0 ? 0.0 : 0.5 * std::erfc(-(std::log(x) - p0) / (p1 * std::numbers::sqrt2));
    case Family::Gamma:
      return x <= 0.0 ? 0.0 : boost::math::gamma_p(p0, p1 * x);
    case Family::Uniform:
      return x <= p0 ? 0.0 : (x >= p1 ? 1.0 : (x - p0) / (p1 - p0));
  }
  return 0.0;
}

// Acklam's rational approximation followed by one Halley refinement step.
double standard_normal_quantile(double u) {
  if (u <= 0.0) return -kInf;
  if (u >= 1.0) return kInf;
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (u < kLow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - kLow) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - step / (1.0 + 0.5 * x * step);
}

double numeric_base_quantile(const Distribution& d, double u) {
  // Only used for families supported on [0, inf).
  double hi = 1.0;
  while (base_cdf(d, hi) < u) {
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      throw Error(ErrorKind::Numeric, "could not bracket quantile");
    }
  }
  return numerics::find_root_bracketed([&](double x) { return base_cdf(d, x) - u; }, 0.0, hi,
                                       kInverseCdfTolerance);
}

// Central moments from log raw moments log E[B^k], k = 1..4.
// d_k = E[B^k]/E[B]^k - 1 keeps the cancellation small for narrow laws.
MomentSet from_log_raw(double l1, double l2, std::optional<double> l3, std::optional<double> l4) {
  MomentSet out;
  const double mean = std::exp(l1);
  const double d2 = std::expm1(l2 - 2.0 * l1);
  out.mean = mean;
  out.variance = mean * mean * d2;
  if (l3) {
    const double d3 = std::expm1(*l3 - 3.0 * l1);
    out.mu3 = mean * mean * mean * (d3 - 3.0 * d2);
    if (l4) {
      const double d4 = std::expm1(*l4 - 4.0 * l1);
      out.mu4 = std::pow(mean, 4) * (d4 - 4.0 * d3 + 6.0 * d2);
    }
  }
  return out;
}

MomentSet base_moments(const Distribution& d) {
  const auto [p0, p1] = d.params();
  switch (d.family()) {
    case Family::Weibull: {
      // E[B^k] = a^(-k/b) * Gamma(1 + k/b)
      const auto l = [&](int k) { return -k * std::log(p0) / p1 + std::lgamma(1.0 + k / p1); };
      return from_log_raw(l(1), l(2), l(3), l(4));
    }
    case Family::FisherF: {
      const double m = p0;
      const double n = p1;
      for (int k = 1; k <= 2; ++k) {
        if (!(n > 2.0 * k)) {
          std::ostringstream msg;
          msg << "fisher_f: moment of order " << k << " does not exist for n=" << n << " (needs n > "
              << 2 * k << ")";
          throw Error(ErrorKind::NonexistentMoment, msg.str());
        }
      }
      // E[B^k] = (n/m)^k Gamma(m/2 + k) Gamma(n/2 - k) / (Gamma(m/2) Gamma(n/2))
      const auto l = [&](int k) -> std::optional<double> {
        if (!(n > 2.0 * k)) return std::nullopt;
        return k * std::log(n / m) + std::lgamma(0.5 * m + k) + std::lgamma(0.5 * n - k) -
               std::lgamma(0.5 * m) - std::lgamma(0.5 * n);
      };
      const auto l3 = l(3);
      return from_log_raw(*l(1), *l(2), l3, l3 ? l(4) : std::nullopt);
    }
    case Family::Normal:
      return {p0, p1 * p1, 0.0, 3.0 * std::pow(p1, 4), Exactness::Analytic, std::nullopt};
    case Family::LogNormal: {
      const auto l = [&](int k) { return k * p0 + 0.5 * k * k * p1 * p1; };
      return from_log_raw(l(1), l(2), l(3), l(4));
    }
    case Family::Gamma:
      return {p0 / p1, p0 / (p1 * p1), 2.0 * p0 / std::pow(p1, 3),
              (3.0 * p0 * p0 + 6.0 * p0) / std::pow(p1, 4), Exactness::Analytic, std::nullopt};
    case Family::Uniform: {
      const double w = p1 - p0;
      return {0.5 * (p0 + p1), w * w / 12.0, 0.0, std::pow(w, 4) / 80.0, Exactness::Analytic, std::nullopt};
    }
  }
  return {};
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::Weibull: return "weibull";
    case Family::FisherF: return "fisher_f";
    case Family::Normal: return "normal";
    case Family::LogNormal: return "lognormal";
    case Family::Gamma: return "gamma";
    case Family::Uniform: return "uniform";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::Weibull, Family::FisherF, Family::Normal, Family::LogNormal, Family::Gamma,
                   Family::Uniform}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorKind::Configuration, "unknown distribution family '" + std::string(name) + "'");
}

std::string_view to_string(Exactness exactness) noexcept {
  switch (exactness) {
    case Exactness::Analytic: return "analytic";
    case Exactness::Quadrature: return "quadrature";
    case Exactness::Sampled: return "sampled";
  }
  return "unknown";
}

Distribution::Distribution(Family family, std::array<double, 2> params, double scale, double shift)
    : family_(family), params_(params), scale_(scale), shift_(shift) {
  validate(family_, params_, scale_, shift_);
}

Distribution Distribution::weibull(double a, double b, double scale, double shift) {
  return {Family::Weibull, {a, b}, scale, shift};
}
Distribution Distribution::fisher_f(double m, double n, double scale, double shift) {
  return {Family::FisherF, {m, n}, scale, shift};
}
Distribution Distribution::normal(double mean, double sd) { return {Family::Normal, {mean, sd}}; }
Distribution Distribution::lognormal(double mu, double sigma, double scale, double shift) {
  return {Family::LogNormal, {mu, sigma}, scale, shift};
}
Distribution Distribution::gamma(double shape, double rate, double scale, double shift) {
  return {Family::Gamma, {shape, rate}, scale, shift};
}
Distribution Distribution::uniform(double lower, double upper) { return {Family::Uniform, {lower, upper}}; }

Distribution Distribution::scaled_by(double factor) const {
  return {family_, params_, scale_ * factor, shift_ * factor};
}

std::pair<double, double> Distribution::support() const {
  double lo = 0.0;
  double hi = kInf;
  switch (family_) {
    case Family::Normal: lo = -kInf; break;
    case Family::Uniform:
      lo = params_[0];
      hi = params_[1];
      break;
    default: break;
  }
  return {scale_ * lo + shift_, scale_ * hi + shift_};
}

double Distribution::mode() const {
  const auto [p0, p1] = params_;
  double base = 0.0;
  switch (family_) {
    case Family::Weibull:
      base = p1 > 1.0 ? std::pow((p1 - 1.0) / (p0 * p1), 1.0 / p1) : 0.0;
      break;
    case Family::FisherF:
      base = p0 > 2.0 ? (p0 - 2.0) / p0 * p1 / (p1 + 2.0) : 0.0;
      break;
    case Family::Normal: base = p0; break;
    case Family::LogNormal: base = std::exp(p0 - p1 * p1); break;
    case Family::Gamma: base = p0 > 1.0 ? (p0 - 1.0) / p1 : 0.0; break;
    case Family::Uniform: base = 0.5 * (p0 + p1); break;
  }
  return scale_ * base + shift_;
}

double MomentSet::sd() const { return std::sqrt(variance); }

double MomentSet::third() const {
  if (!mu3) throw Error(ErrorKind::NonexistentMoment, "central moment of order 3 does not exist");
  return *mu3;
}

double MomentSet::fourth() const {
  if (!mu4) throw Error(ErrorKind::NonexistentMoment, "central moment of order 4 does not exist");
  return *mu4;
}

double pdf(const Distribution& dist, double x) {
  if (std::isnan(x)) throw Error(ErrorKind::Domain, "pdf evaluated at NaN");
  return base_pdf(dist, to_base(dist, x)) / dist.scale();
}

double cdf(const Distribution& dist, double x) {
  if (std::isnan(x)) throw Error(ErrorKind::Domain, "cdf evaluated at NaN");
  return base_cdf(dist, to_base(dist, x));
}

MomentSet moments(const Distribution& dist) {
  MomentSet out = base_moments(dist);
  const double s = dist.scale();
  out.mean = s * out.mean + dist.shift();
  out.variance *= s * s;
  if (out.mu3) *out.mu3 *= s * s * s;
  if (out.mu4) *out.mu4 *= s * s * s * s;
  out.exactness = Exactness::Analytic;
  return out;
}

double inverse_cdf(const Distribution& dist, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << "inverse_cdf argument must lie in [0, 1), got " << u;
    throw Error(ErrorKind::Domain, msg.str());
  }
  const auto [p0, p1] = dist.params();
  double base = 0.0;
  switch (dist.family()) {
    case Family::Weibull:
      base = std::pow(-std::log1p(-u) / p0, 1.0 / p1);
      break;
    case Family::Uniform:
      base = p0 + u * (p1 - p0);
      break;
    case Family::Normal:
      base = p0 + p1 * standard_normal_quantile(u);
      break;
    case Family::LogNormal:
      base = u == 0.0 ? 0.0 : std::exp(p0 + p1 * standard_normal_quantile(u));
      break;
    case Family::FisherF:
    case Family::Gamma:
      base = u == 0.0 ? 0.0 : numeric_base_quantile(dist, u);
      break;
  }
  return dist.scale() * base + dist.shift();
}

double open_unit(Rng& rng) {
  // (k + 0.5) / 2^53 for k uniform in [0, 2^53)
  const std::uint64_t k = rng() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double draw(const Distribution& dist, Rng& rng) {
  const auto [p0, p1] = dist.params();
  double base = 0.0;
  switch (dist.family()) {
    case Family::Weibull:
    case Family::Uniform:
      return inverse_cdf(dist, open_unit(rng));
    case Family::Normal:
      base = std::normal_distribution<double>(p0, p1)(rng);
      break;
    case Family::LogNormal:
      base = std::exp(std::normal_distribution<double>(p0, p1)(rng));
      break;
    case Family::Gamma:
      base = std::gamma_distribution<double>(p0, 1.0 / p1)(rng);
      break;
    case Family::FisherF: {
      const double num = std::gamma_distribution<double>(0.5 * p0, 2.0)(rng) / p0;
      const double den = std::gamma_distribution<double>(0.5 * p1, 2.0)(rng) / p1;
      base = num / den;
      break;
    }
  }
  return dist.scale() * base + dist.shift();
}

std::vector<double> sample(const Distribution& dist, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::Domain, "sample count must be at least 1");
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = draw(dist, rng);
  return out;
}

Distribution weibull_from_mean_cov(double mean, double cov) {
  if (!positive_finite(mean)) parameter_error("weibull", "mean must be > 0");
  if (!(cov > 0.0 && cov < 1.0)) parameter_error("weibull", "cov must lie in (0, 1)");

  // CoV of a Weibull law depends on the shape only; it equals 1 at shape 1
  // and decreases monotonically.
  const auto cov_of_shape = [](double shape) {
    return std::sqrt(std::expm1(std::lgamma(1.0 + 2.0 / shape) - 2.0 * std::lgamma(1.0 + 1.0 / shape)));
  };
  const double target = std::log(cov);
  const auto residual = [&](double log_shape) { return std::log(cov_of_shape(std::exp(log_shape))) - target; };
  const double log_shape = numerics::find_root_bracketed(residual, 0.0, std::log(1e9), 1e-15);
  const double shape = std::exp(log_shape);
  const double round_trip = cov_of_shape(shape);
  if (!(std::abs(round_trip - cov) <= 1e-8 * cov)) {
    std::ostringstream msg;
    msg << "weibull shape solve did not converge: cov residual " << round_trip - cov;
    throw Error(ErrorKind::Numeric, msg.str());
  }
  const double characteristic = mean / std::exp(std::lgamma(1.0 + 1.0 / shape));
  return Distribution::weibull(1.0, shape, characteristic);
}

namespace {

double require_param(const DistributionRecord& r, const std::string& key) {
  const auto it = r.params.find(key);
  if (it == r.params.end()) {
    throw Error(ErrorKind::Configuration, r.family + ": missing parameter '" + key + "'");
  }
  return it->second;
}

void reject_unknown(const DistributionRecord& r, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : r.params) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw Error(ErrorKind::Configuration, r.family + ": unknown parameter '" + key + "'");
  }
}

}  // namespace

Distribution from_record(const DistributionRecord& r) {
  const Family family = family_from_string(r.family);
  switch (family) {
    case Family::Weibull:
      if (r.params.contains("mean") || r.params.contains("cov")) {
        reject_unknown(r, {"mean", "cov"});
        const Distribution base = weibull_from_mean_cov(require_param(r, "mean"), require_param(r, "cov"));
        return Distribution::weibull(1.0, base.params()[1], base.scale() * r.scale, r.shift);
      }
      reject_unknown(r, {"a", "b"});
      return Distribution::weibull(require_param(r, "a"), require_param(r, "b"), r.scale, r.shift);
    case Family::FisherF:
      reject_unknown(r, {"m", "n"});
      return Distribution::fisher_f(require_param(r, "m"), require_param(r, "n"), r.scale, r.shift);
    case Family::Normal:
      reject_unknown(r, {"mean", "sd"});
      return {Family::Normal, {require_param(r, "mean"), require_param(r, "sd")}, r.scale, r.shift};
    case Family::LogNormal:
      reject_unknown(r, {"mu", "sigma"});
      return Distribution::lognormal(require_param(r, "mu"), require_param(r, "sigma"), r.scale, r.shift);
    case Family::Gamma:
      reject_unknown(r, {"shape", "rate"});
      return Distribution::gamma(require_param(r, "shape"), require_param(r, "rate"), r.scale, r.shift);
    case Family::Uniform:
      reject_unknown(r, {"lower", "upper"});
      return {Family::Uniform, {require_param(r, "lower"), require_param(r, "upper")}, r.scale, r.shift};
  }
  throw Error(ErrorKind::Configuration, "unhandled family");
}

DistributionRecord to_record(const Distribution& dist) {
  static const std::map<Family, std::pair<const char*, const char*>> kNames = {
      {Family::Weibull, {"a", "b"}},        {Family::FisherF, {"m", "n"}},
      {Family::Normal, {"mean", "sd"}},     {Family::LogNormal, {"mu", "sigma"}},
      {Family::Gamma, {"shape", "rate"}},   {Family::Uniform, {"lower", "upper"}}};
  const auto& [first, second] = kNames.at(dist.family());
  DistributionRecord r;
  r.family = std::string(to_string(dist.family()));
  r.params[first] = dist.params()[0];
  r.params[second] = dist.params()[1];
  r.scale = dist.scale();
  r.shift = dist.shift();
  return r;
}

}  // namespace rfosm
