#include <atomic>
#include <cmath>

#include <gtest/gtest.h>

#include "rfosm/distributions.hpp"
#include "rfosm/error.hpp"
#include "rfosm/numerics.hpp"
#include "rfosm/propagation.hpp"
#include "rfosm/random_input.hpp"
#include "rfosm/reciprocal.hpp"

using namespace rfosm;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an rfosm::Error";
  return ErrorKind::Io;
}

ObjectiveModel scalar_model(std::function<double(double)> g) {
  ObjectiveModel m;
  m.dimension = 1;
  m.value = [g](const Eigen::VectorXd& x) { return g(x[0]); };
  return m;
}

ObjectiveModel linear(const Eigen::VectorXd& coef) {
  ObjectiveModel m;
  m.dimension = static_cast<std::size_t>(coef.size());
  m.value = [coef](const Eigen::VectorXd& x) { return coef.dot(x); };
  m.gradient = [coef](const Eigen::VectorXd&) { return coef; };
  m.hessian = [n = coef.size()](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(n, n).eval(); };
  return m;
}

}  // namespace

TEST(Methods, KeysRoundTrip) {
  for (Method m : {Method::FOSM, Method::SOFM, Method::RecFOSM, Method::MonteCarlo}) {
    EXPECT_EQ(method_from_string(to_string(m)), m);
  }
  EXPECT_EQ(to_string(Method::MonteCarlo), "mc");
  EXPECT_EQ(kind_of([] { (void)method_from_string("form"); }), ErrorKind::Validation);
}

TEST(Fosm, LinearNormal) {
  const auto in = RandomInput::from_marginals({Distribution::normal(5, 2)}, {"x"});
  const auto est = fosm(linear(Eigen::VectorXd::Constant(1, 3.0)), in);
  EXPECT_DOUBLE_EQ(est.mean, 15.0);
  EXPECT_DOUBLE_EQ(est.sd, 6.0);
  EXPECT_EQ(est.method, Method::FOSM);
}

TEST(Fosm, CorrelatedLinearUsesFullCovariance) {
  Eigen::Matrix2d rho;
  rho << 1, 0.5, 0.5, 1;
  const auto in = RandomInput::from_marginals({Distribution::normal(0, 1), Distribution::normal(0, 2)}, {"a", "b"}, rho);
  Eigen::Vector2d c(1, 1);
  // var = 1 + 4 + 2*0.5*1*2
  EXPECT_NEAR(fosm(linear(c), in).sd, std::sqrt(7.0), 1e-14);
}

TEST(Fosm, FiniteDifferenceGradientFallback) {
  const auto in = RandomInput::from_marginals({Distribution::normal(2, 0.1)}, {"x"});
  const auto est = fosm(scalar_model([](double x) { return x * x * x; }), in);
  EXPECT_DOUBLE_EQ(est.mean, 8.0);
  EXPECT_NEAR(est.sd, 12.0 * 0.1, 1e-8);
}

TEST(Fosm, DimensionMismatch) {
  const auto in = RandomInput::from_marginals({Distribution::normal(2, 0.1)}, {"x"});
  EXPECT_EQ(kind_of([&] { (void)fosm(linear(Eigen::Vector2d(1, 1)), in); }), ErrorKind::Validation);
}

TEST(Sofm, ZeroHessianIsBitIdenticalToFosm) {
  const auto in = RandomInput::from_marginals(
      {Distribution::weibull(3, 5), Distribution::fisher_f(25, 100, 70.0), Distribution::uniform(1, 2)},
      {"a", "b", "c"});
  const auto model = linear(Eigen::Vector3d(0.3, -1.7, 2.2));
  const auto f = fosm(model, in);
  const auto s = sofm(model, in);
  EXPECT_EQ(f.mean, s.mean);
  EXPECT_EQ(f.sd, s.sd);
  EXPECT_EQ(s.method, Method::SOFM);
}

TEST(Sofm, SquareOfStandardNormal) {
  const auto in = RandomInput::from_marginals({Distribution::normal(0, 1)}, {"x"});
  ObjectiveModel m = scalar_model([](double x) { return x * x; });
  m.gradient = [](const Eigen::VectorXd& x) { return (2.0 * x).eval(); };
  m.hessian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Constant(1, 1, 2.0); };
  const auto est = sofm(m, in);
  EXPECT_DOUBLE_EQ(est.mean, 1.0);
  EXPECT_DOUBLE_EQ(est.sd * est.sd, 2.0);
}

TEST(Sofm, SquareOfGammaMatchesExactForQuadratic) {
  // For g = x^2 the expansion is exact: mean = mu^2 + var, var(g) from moments.
  const Distribution d = Distribution::gamma(4, 2);
  const MomentSet m = moments(d);
  const auto in = RandomInput::from_marginals({d}, {"x"});
  const auto est = sofm(scalar_model([](double x) { return x * x; }), in);
  const double mu = m.mean;
  const double exact_var = 4 * mu * mu * m.variance + 4 * mu * m.third() + m.fourth() - m.variance * m.variance;
  EXPECT_NEAR(est.mean, mu * mu + m.variance, 1e-6);
  EXPECT_NEAR(est.sd * est.sd, exact_var, 1e-5);
}

TEST(Sofm, CorrelatedInputRejected) {
  Eigen::Matrix2d rho;
  rho << 1, 0.3, 0.3, 1;
  const auto in = RandomInput::from_marginals({Distribution::normal(0, 1), Distribution::normal(0, 2)}, {"a", "b"}, rho);
  EXPECT_EQ(kind_of([&] { (void)sofm(linear(Eigen::Vector2d(1, 1)), in); }), ErrorKind::UnsupportedConfiguration);
}

TEST(RecFosm, ReciprocalModelIsExact) {
  // g = C / x is linear in z = 1/x, so recFOSM returns the exact moments.
  const double C = 2.5;
  const Distribution d = Distribution::fisher_f(25, 100, 70.0);
  const auto recip = reciprocal_moments(d);
  const auto z = reciprocal_analytic(d);
  ASSERT_TRUE(z.has_value());
  const MomentSet mz = moments(*z);
  const auto est = rec_fosm(scalar_model([C](double x) { return C / x; }), recip);
  EXPECT_NEAR(est.mean, C * mz.mean, 1e-14);
  EXPECT_NEAR(est.sd, C * mz.sd(), 1e-8 * C * mz.sd());
  EXPECT_EQ(est.meta.reciprocal_source, ReciprocalSource::AnalyticPair);
}

TEST(RecFosm, AnalyticGradientChainRule) {
  const auto recip = reciprocal_moments(Distribution::weibull(3, 5));
  ObjectiveModel m = scalar_model([](double x) { return 4.0 / x; });
  m.gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, -4.0 / (x[0] * x[0])); };
  const auto est = rec_fosm(m, recip);
  EXPECT_NEAR(est.mean, 4.0 * recip.mean_z[0], 1e-14);
  EXPECT_NEAR(est.sd, 4.0 * std::sqrt(recip.cov_z(0, 0)), 1e-12);
}

TEST(RecFosm, ZeroReciprocalMeanRejected) {
  ReciprocalMoments r;
  r.mean_z = Eigen::VectorXd::Zero(1);
  r.cov_z = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_EQ(kind_of([&] { (void)rec_fosm(scalar_model([](double x) { return x; }), r); }),
            ErrorKind::DivisionDomain);
}

TEST(RecFosm, CostParityWithFosm) {
  std::atomic<int> values{0};
  std::atomic<int> gradients{0};
  ObjectiveModel m;
  m.dimension = 2;
  m.value = [&](const Eigen::VectorXd& x) {
    ++values;
    return x[0] / x[1];
  };
  m.gradient = [&](const Eigen::VectorXd& x) {
    ++gradients;
    return Eigen::Vector2d(1.0 / x[1], -x[0] / (x[1] * x[1])).eval();
  };
  const auto in = RandomInput::from_marginals({Distribution::uniform(1, 2), Distribution::weibull(3, 5)}, {"a", "b"});
  (void)fosm(m, in);
  EXPECT_EQ(values, 1);
  EXPECT_EQ(gradients, 1);
  values = 0;
  gradients = 0;
  (void)rec_fosm(m, reciprocal_moments(in));
  EXPECT_EQ(values, 1);
  EXPECT_EQ(gradients, 1);
}

TEST(RecFosm, MixedSubstitution) {
  const Distribution num = Distribution::normal(5, 1);
  const Distribution den = Distribution::weibull(3, 5);
  const auto in = RandomInput::from_marginals({num, den}, {"a", "b"});
  ObjectiveModel m;
  m.dimension = 2;
  m.value = [](const Eigen::VectorXd& x) { return x[0] / x[1]; };
  const auto sm = substituted_moments(in, {false, true});
  EXPECT_EQ(sm.mean[0], 5.0);
  EXPECT_EQ(sm.source, ReciprocalSource::Quadrature);
  const auto r = reciprocal_moments(den);
  const double mz = r.mean_z[0];
  const double vz = r.cov_z(0, 0);
  const auto est = rec_fosm(m, sm);
  EXPECT_NEAR(est.mean, 5.0 * mz, 1e-12);
  EXPECT_NEAR(est.sd, std::sqrt(25.0 * vz + mz * mz * 1.0), 1e-6);
}

TEST(RecFosm, NoSubstitutionEqualsFosm) {
  const auto in = RandomInput::from_marginals({Distribution::normal(5, 1), Distribution::uniform(1, 2)}, {"a", "b"});
  const auto model = linear(Eigen::Vector2d(2, -3));
  const auto a = rec_fosm(model, substituted_moments(in, {false, false}));
  const auto b = fosm(model, in);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.sd, b.sd);
}

TEST(RecFosm, CorrelatedSubstitutionNeedsSampling) {
  Eigen::Matrix2d rho;
  rho << 1, 0.4, 0.4, 1;
  const auto in =
      RandomInput::from_marginals({Distribution::uniform(1, 2), Distribution::weibull(3, 5)}, {"a", "b"}, rho);
  EXPECT_EQ(kind_of([&] { (void)substituted_moments(in, {false, true}); }), ErrorKind::UnsupportedConfiguration);
  const auto sm = substituted_moments(in, {false, true}, SamplingOptions{50'000, 8});
  EXPECT_EQ(sm.source, ReciprocalSource::Sampled);
  EXPECT_LT(sm.covariance(0, 1), 0.0);  // 1/x flips the sign of the dependence
}

TEST(RecFosm, MaskSizeChecked) {
  const auto in = RandomInput::from_marginals({Distribution::uniform(1, 2)}, {"a"});
  EXPECT_EQ(kind_of([&] { (void)substituted_moments(in, {true, true}); }), ErrorKind::Validation);
}

TEST(MonteCarlo, DeterministicAndSeedSensitive) {
  const auto in = RandomInput::from_marginals({Distribution::weibull(3, 5)}, {"x"});
  const auto m = scalar_model([](double x) { return 1.0 / x; });
  const auto a = monte_carlo(m, in, 5000, 17);
  const auto b = monte_carlo(m, in, 5000, 17);
  const auto c = monte_carlo(m, in, 5000, 18);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.sd, b.sd);
  EXPECT_NE(a.mean, c.mean);
  EXPECT_EQ(a.meta.seed, 17u);
  EXPECT_EQ(a.meta.sample_count, 5000u);
}

TEST(MonteCarlo, ThreadedMatchesSequential) {
  const auto in = RandomInput::from_marginals({Distribution::weibull(3, 5), Distribution::uniform(1, 2)}, {"a", "b"});
  ObjectiveModel m = linear(Eigen::Vector2d(1, 2));
  m.concurrent_safe = false;
  const auto seq = monte_carlo(m, in, 20'000, 3);
  m.concurrent_safe = true;
  const auto par = monte_carlo(m, in, 20'000, 3);
  EXPECT_EQ(seq.mean, par.mean);
  EXPECT_EQ(seq.sd, par.sd);
}

TEST(MonteCarlo, LinearMeanWithinThreeStandardErrors) {
  const auto in = RandomInput::from_marginals({Distribution::fisher_f(25, 100, 70.0)}, {"x"});
  const auto est = monte_carlo(linear(Eigen::VectorXd::Constant(1, 1.0)), in, 200'000, 123);
  const MomentSet m = moments(in.marginals()[0]);
  EXPECT_LT(std::abs(est.mean - m.mean), 3.0 * *est.meta.se_mean);
  EXPECT_LT(std::abs(est.sd - m.sd()), 3.0 * *est.meta.se_sd);
  EXPECT_NEAR(*est.meta.se_mean, est.sd / std::sqrt(200'000.0), 1e-15);
}

TEST(MonteCarlo, Errors) {
  const auto in = RandomInput::from_marginals({Distribution::normal(0, 1)}, {"x"});
  const auto m = scalar_model([](double x) { return std::log(x); });
  EXPECT_EQ(kind_of([&] { (void)monte_carlo(m, in, 1, 1); }), ErrorKind::EstimatorUndefined);
  try {
    (void)monte_carlo(m, in, 100, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Model);
    EXPECT_NE(std::string(e.what()).find("draw"), std::string::npos);
  }
}

TEST(DataBacked, FosmUsesSampleCovariance) {
  Eigen::MatrixXd s(4, 2);
  s << 1, 2, 2, 4, 3, 5, 4, 9;
  const auto in = RandomInput::from_samples(s, {"a", "b"});
  const auto sm = numerics::sample_mean_covariance(s);
  const Eigen::Vector2d c(1, -1);
  const auto est = fosm(linear(c), in);
  EXPECT_DOUBLE_EQ(est.mean, c.dot(sm.mean));
  EXPECT_NEAR(est.sd * est.sd, c.dot(sm.covariance * c), 1e-12);
  const auto mc = monte_carlo(linear(c), in, 4, 99);
  EXPECT_FALSE(mc.meta.seed.has_value());
  EXPECT_NEAR(mc.mean, est.mean, 1e-14);
  EXPECT_NEAR(mc.sd, est.sd, 1e-14);
}

TEST(DataBacked, ScalarSofmUsesSampleMoments) {
  const auto xs = sample(Distribution::gamma(4, 2), 1000, 5);
  Eigen::MatrixXd s(1000, 1);
  for (int i = 0; i < 1000; ++i) s(i, 0) = xs[i];
  const auto in = RandomInput::from_samples(s, {"x"});
  const auto est = sofm(scalar_model([](double x) { return x * x; }), in);
  const auto mm = in.marginal_moments()[0];
  EXPECT_NEAR(est.mean, mm.mean * mm.mean + mm.variance, 1e-6);
}

TEST(DataBacked, RecFosmMatchesEmpiricalReciprocal) {
  Eigen::MatrixXd s(3, 1);
  s << 1, 2, 4;
  const auto in = RandomInput::from_samples(s, {"x"});
  const auto m = scalar_model([](double x) { return 3.0 / x; });
  const auto est = rec_fosm(m, substituted_moments(in, {true}));
  const auto r = empirical_reciprocal_moments(s);
  EXPECT_NEAR(est.mean, 3.0 * r.mean_z[0], 1e-14);
  EXPECT_NEAR(est.sd, 3.0 * std::sqrt(r.cov_z(0, 0)), 1e-7);
  EXPECT_EQ(est.meta.reciprocal_source, ReciprocalSource::Empirical);
}

TEST(RandomInputChecks, CorrelationValidated) {
  Eigen::Matrix2d bad;
  bad << 1, 2, 2, 1;
  EXPECT_EQ(kind_of([&] {
              (void)RandomInput::from_marginals({Distribution::normal(0, 1), Distribution::normal(0, 1)}, {"a", "b"},
                                                bad);
            }),
            ErrorKind::Validation);
  Eigen::Matrix2d asym;
  asym << 1, 0.2, 0.3, 1;
  EXPECT_EQ(kind_of([&] {
              (void)RandomInput::from_marginals({Distribution::normal(0, 1), Distribution::normal(0, 1)}, {"a", "b"},
                                                asym);
            }),
            ErrorKind::Validation);
}

TEST(RandomInputChecks, CopulaPreservesMarginals) {
  Eigen::Matrix2d rho;
  rho << 1, 0.7, 0.7, 1;
  const auto in =
      RandomInput::from_marginals({Distribution::weibull(3, 5), Distribution::uniform(1, 2)}, {"a", "b"}, rho);
  const auto x = in.realizations(200'000, 21);
  const auto sm = numerics::sample_mean_covariance(x);
  const MomentSet w = moments(Distribution::weibull(3, 5));
  EXPECT_LT(std::abs(sm.mean[0] - w.mean), 3.0 * w.sd() / std::sqrt(2e5));
  EXPECT_LT(std::abs(sm.mean[1] - 1.5), 3.0 * std::sqrt(1.0 / 12.0 / 2e5));
  EXPECT_GT(sm.covariance(0, 1), 0.0);
}

TEST(RandomInputChecks, DataRealizationsBounded) {
  Eigen::MatrixXd s(3, 1);
  s << 1, 2, 3;
  const auto in = RandomInput::from_samples(s, {"x"});
  EXPECT_EQ(in.realizations(2, 0).rows(), 2);
  EXPECT_EQ(kind_of([&] { (void)in.realizations(4, 0); }), ErrorKind::Validation);
  EXPECT_FALSE(in.is_correlated());
}
