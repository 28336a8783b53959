#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rfosm {

enum class Family { Weibull, FisherF, Normal, LogNormal, Gamma, Uniform };

[[nodiscard]] std::string_view to_string(Family family) noexcept;
/// Accepts the canonical lowercase names ("weibull", "fisher_f", "normal",
/// "lognormal", "gamma", "uniform"). Throws Configuration on anything else.
[[nodiscard]] Family family_from_string(std::string_view name);

/// Scalar law X = scale * B + shift, where B is the base family.
///
/// Base parameterizations:
///   Weibull   (a, b)        pdf a*b*x^(b-1)*exp(-a*x^b), x >= 0
///   FisherF   (m, n)        degrees of freedom
///   Normal    (mean, sd)
///   LogNormal (mu, sigma)   of log X
///   Gamma     (shape, rate)
///   Uniform   (lower, upper)
///
/// Instances are validated on construction and are immutable afterwards.
class Distribution {
 public:
  static Distribution weibull(double a, double b, double scale = 1.0, double shift = 0.0);
  static Distribution fisher_f(double m, double n, double scale = 1.0, double shift = 0.0);
  static Distribution normal(double mean, double sd);
  static Distribution lognormal(double mu, double sigma, double scale = 1.0, double shift = 0.0);
  static Distribution gamma(double shape, double rate, double scale = 1.0, double shift = 0.0);
  static Distribution uniform(double lower, double upper);

  /// Generic constructor; validates parameters for the family.
  Distribution(Family family, std::array<double, 2> params, double scale = 1.0,
               double shift = 0.0);

  [[nodiscard]] Family family() const noexcept { return family_; }
  [[nodiscard]] const std::array<double, 2>& params() const noexcept { return params_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] double shift() const noexcept { return shift_; }

  /// Same base law with scale multiplied by `factor` and shift scaled too.
  [[nodiscard]] Distribution scaled_by(double factor) const;

  /// Closed support [lower, upper] after scale and shift (may be infinite).
  [[nodiscard]] std::pair<double, double> support() const;

  /// Mode of X (0 for families whose density peaks at the lower bound).
  [[nodiscard]] double mode() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  Family family_;
  std::array<double, 2> params_;
  double scale_;
  double shift_;
};

enum class Exactness { Analytic, Quadrature, Sampled };

[[nodiscard]] std::string_view to_string(Exactness exactness) noexcept;

/// Mean and central moments up to order four. mu3/mu4 are absent when they
/// do not exist for the law (e.g. FisherF with small n).
struct MomentSet {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> mu3;
  std::optional<double> mu4;
  Exactness exactness = Exactness::Analytic;
  std::optional<std::size_t> sample_count;

  [[nodiscard]] double sd() const;
  /// Throws NonexistentMoment naming the order if mu3 / mu4 are missing.
  [[nodiscard]] double third() const;
  [[nodiscard]] double fourth() const;
};

[[nodiscard]] double pdf(const Distribution& dist, double x);
[[nodiscard]] double cdf(const Distribution& dist, double x);

/// Throws NonexistentMoment if the mean or variance does not exist.
[[nodiscard]] MomentSet moments(const Distribution& dist);

/// Quantile for u in [0, 1). Closed form for Weibull, Uniform, Normal and
/// LogNormal; numeric root-find on the CDF (tolerance 1e-10) otherwise.
[[nodiscard]] double inverse_cdf(const Distribution& dist, double u);

using Rng = std::mt19937_64;

/// Uniform draw strictly inside (0, 1) with 53 random bits.
[[nodiscard]] double open_unit(Rng& rng);

/// One draw from `dist` using `rng`.
[[nodiscard]] double draw(const Distribution& dist, Rng& rng);

/// `count` deterministic draws for the given seed.
[[nodiscard]] std::vector<double> sample(const Distribution& dist, std::size_t count,
                                         std::uint64_t seed);

/// Weibull (a*b*x^(b-1)*exp(-a*x^b) form with a = 1 and the scale field carrying the
/// characteristic length) whose mean is `mean` and whose sd/mean is `cov`.
[[nodiscard]] Distribution weibull_from_mean_cov(double mean, double cov);

/// Named-parameter record, as found in study configs.
struct DistributionRecord {
  std::string family;
  std::map<std::string, double> params;
  double scale = 1.0;
  double shift = 0.0;
};

/// Builds a distribution from a record. A Weibull record may give
/// {mean, cov} instead of {a, b}.
[[nodiscard]] Distribution from_record(const DistributionRecord& record);
[[nodiscard]] DistributionRecord to_record(const Distribution& dist);

}  // namespace rfosm
