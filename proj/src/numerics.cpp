#include "rfosm/numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "rfosm/error.hpp"

namespace rfosm::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod abscissae (descending), Kronrod weights, and the weights of the
// embedded 7-point Gauss rule (which uses the odd Kronrod abscissae).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

double checked_eval(const ScalarFunction& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream msg;
    msg << "integrand is not finite at x=" << x;
    throw QuadratureError(msg.str(), std::numeric_limits<double>::quiet_NaN(),
                          std::numeric_limits<double>::infinity());
  }
  return y;
}

Segment gauss_kronrod(const ScalarFunction& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = checked_eval(f, center);

  double kronrod = f_center * kWgk[7];
  double gauss = f_center * kWg[3];
  double abs_sum = std::abs(kronrod);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = checked_eval(f, center - dx);
    f2[j] = checked_eval(f, center + dx);
    kronrod += kWgk[j] * (f1[j] + f2[j]);
    abs_sum += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) {
      gauss += kWg[j / 2] * (f1[j] + f2[j]);
    }
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(f_center - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }

  const double value = kronrod * half;
  const double res_abs = abs_sum * std::abs(half);
  const double res_asc = asc * std::abs(half);
  double error = std::abs((kronrod - gauss) * half);
  if (res_asc != 0.0 && error != 0.0) {
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    error = std::max(50.0 * kEps * res_abs, error);
  }
  return {lo, hi, value, error};
}

QuadratureResult adaptive(const ScalarFunction& f, const std::vector<std::pair<double, double>>& ranges,
                          double tol_rel, std::size_t budget) {
  if (!(tol_rel >= 1e-12 && tol_rel <= 1e-3)) {
    throw Error(ErrorKind::Domain, "quadrature tolerance must lie in [1e-12, 1e-3]");
  }
  constexpr std::size_t kPointsPerSegment = 15;

  std::priority_queue<Segment> pending;
  std::vector<Segment> settled;
  std::size_t evaluations = 0;
  for (const auto& [lo, hi] : ranges) {
    pending.push(gauss_kronrod(f, lo, hi));
    evaluations += kPointsPerSegment;
  }

  auto totals = [&]() {
    std::vector<double> values;
    std::vector<double> errors;
    auto copy = pending;
    while (!copy.empty()) {
      values.push_back(copy.top().value);
      errors.push_back(copy.top().error);
      copy.pop();
    }
    for (const auto& s : settled) {
      values.push_back(s.value);
      errors.push_back(s.error);
    }
    return std::pair{pairwise_sum(values), pairwise_sum(errors)};
  };

  double value = 0.0;
  double error = 0.0;
  {
    auto [v, e] = totals();
    value = v;
    error = e;
  }

  while (error > tol_rel * std::abs(value) && !pending.empty()) {
    if (evaluations + 2 * kPointsPerSegment > budget) {
      auto [v, e] = totals();
      std::ostringstream msg;
      msg << "quadrature did not converge within " << budget
          << " evaluations (partial value " << v << ", residual " << e << ")";
      throw QuadratureError(msg.str(), v, e);
    }
    const Segment worst = pending.top();
    pending.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const bool splittable =
        mid > worst.lo && mid < worst.hi &&
        (worst.hi - worst.lo) > 100.0 * kEps * std::max(std::abs(worst.lo), std::abs(worst.hi));
    if (!splittable) {
      settled.push_back(worst);
      continue;
    }
    const Segment left = gauss_kronrod(f, worst.lo, mid);
    const Segment right = gauss_kronrod(f, mid, worst.hi);
    evaluations += 2 * kPointsPerSegment;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pending.push(left);
    pending.push(right);
  }

  auto [v, e] = totals();
  if (e > tol_rel * std::abs(v)) {
    std::ostringstream msg;
    msg << "quadrature reached the resolution limit with residual " << e << " for value " << v;
    throw QuadratureError(msg.str(), v, e);
  }
  return {v, e, evaluations};
}

}  // namespace

QuadratureResult integrate(const ScalarFunction& f, double lo, double hi, double tol_rel,
                           std::size_t budget) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw Error(ErrorKind::Domain, "integration bounds must be finite with lo < hi");
  }
  return adaptive(f, {{lo, hi}}, tol_rel, budget);
}

QuadratureResult integrate_semi_infinite(const ScalarFunction& f, double tol_rel, double split,
                                         std::size_t budget) {
  if (!(split > 0.0 && std::isfinite(split))) {
    throw Error(ErrorKind::Domain, "split point must be positive and finite");
  }
  // u in [0,1] covers [0, split] linearly; u in [1,2] covers the tail.
  const ScalarFunction mapped = [&f, split](double u) {
    if (u <= 1.0) {
      return split * f(split * u);
    }
    const double t = u - 1.0;
    const double one_minus = 1.0 - t;
    const double z = split + t / one_minus;
    if (!std::isfinite(z)) {
      return 0.0;
    }
    const double y = f(z);
    return y == 0.0 ? 0.0 : y / (one_minus * one_minus);
  };
  return adaptive(mapped, {{0.0, 1.0}, {1.0, 2.0}}, tol_rel, budget);
}

double find_root_bracketed(const ScalarFunction& f, double lo, double hi, double tol) {
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw Error(ErrorKind::Numeric, "root function is not finite at a bracket endpoint");
  }
  if (fa == 0.0) {
    return a;
  }
  if (fb == 0.0) {
    return b;
  }
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << fa << ", f(hi)=" << fb;
    throw Error(ErrorKind::Bracket, msg.str());
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  constexpr int kMaxIterations = 500;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double width_tol = std::max(tol * std::abs(b), 2.0 * kEps * std::abs(b)) +
                             std::numeric_limits<double>::min();
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= tol || fb == 0.0 || std::abs(m) <= width_tol) {
      return b;
    }
    if (std::abs(e) >= width_tol && std::abs(fa) > std::abs(fb)) {
      // secant / inverse quadratic step
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(width_tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > width_tol ? d : (m > 0.0 ? width_tol : -width_tol);
    fb = f(b);
    if (!std::isfinite(fb)) {
      throw Error(ErrorKind::Numeric, "root function is not finite inside the bracket");
    }
  }
  std::ostringstream msg;
  msg << "root finding did not converge; last iterate " << b << " with residual " << fb;
  throw Error(ErrorKind::Numeric, msg.str());
}

Eigen::VectorXd finite_diff(const VectorFunction& f, const Eigen::VectorXd& x, DiffOrder order) {
  const auto eval = [&f](const Eigen::VectorXd& point) {
    const double y = f(point);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "model value is not finite at [" << point.transpose() << "]";
      throw Error(ErrorKind::Model, msg.str());
    }
    return y;
  };

  const Eigen::Index n = x.size();
  Eigen::VectorXd out(n);
  const double center = order == DiffOrder::HessianDiagonal ? eval(x) : 0.0;
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = order == DiffOrder::Gradient ? gradient_step(x[i]) : hessian_step(x[i]);
    probe[i] = x[i] + step;
    const double up_step = probe[i] - x[i];
    const double f_up = eval(probe);
    probe[i] = x[i] - step;
    const double down_step = x[i] - probe[i];
    const double f_down = eval(probe);
    probe[i] = x[i];
    if (order == DiffOrder::Gradient) {
      out[i] = (f_up - f_down) / (up_step + down_step);
    } else {
      const double h = 0.5 * (up_step + down_step);
      out[i] = (f_up - 2.0 * center + f_down) / (h * h);
    }
  }
  return out;
}

SampleMoments sample_mean_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index dim = rows.cols();
  if (n < 2) {
    throw Error(ErrorKind::EstimatorUndefined,
                "sample covariance needs at least 2 realizations, got " + std::to_string(n));
  }
  SampleMoments out{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) out.mean[i] += rows(k, i);
  }
  out.mean /= static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double di = rows(k, i) - out.mean[i];
      for (Eigen::Index j = 0; j <= i; ++j) out.covariance(i, j) += di * (rows(k, j) - out.mean[j]);
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      out.covariance(i, j) /= static_cast<double>(n - 1);
      out.covariance(j, i) = out.covariance(i, j);
    }
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 32;
  if (values.size() <= kBlock) {
    double sum = 0.0;
    for (double v : values) {
      sum += v;
    }
    return sum;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace rfosm::numerics
