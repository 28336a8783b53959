#include "rfosm/beam.hpp"

#include <cmath>
#include <sstream>

#include "rfosm/error.hpp"

namespace rfosm::beam {

namespace {

double exponent(std::string_view name) {
  if (name == "F") return 1.0;
  if (name == "L") return 3.0;
  if (name == "E") return -1.0;
  if (name == "h") return -3.0;
  if (name == "b") return -1.0;
  throw Error(ErrorKind::Configuration, "unknown beam parameter '" + std::string(name) + "'");
}

}  // namespace

void BeamParams::validate() const {
  for (auto name : kParameterNames) {
    const double v = get(name);
    if (!(std::isfinite(v) && v > 0.0)) {
      std::ostringstream msg;
      msg << "beam parameter " << name << " must be strictly positive, got " << v;
      throw Error(ErrorKind::ParameterDomain, msg.str());
    }
  }
}

double BeamParams::get(std::string_view name) const {
  if (name == "F") return F;
  if (name == "L") return L;
  if (name == "E") return E;
  if (name == "h") return h;
  if (name == "b") return b;
  throw Error(ErrorKind::Configuration, "unknown beam parameter '" + std::string(name) + "'");
}

void BeamParams::set(std::string_view name, double value) {
  if (name == "F") F = value;
  else if (name == "L") L = value;
  else if (name == "E") E = value;
  else if (name == "h") h = value;
  else if (name == "b") b = value;
  else throw Error(ErrorKind::Configuration, "unknown beam parameter '" + std::string(name) + "'");
}

double tip_deflection(const BeamParams& p) {
  p.validate();
  return 4.0 * p.F * p.L * p.L * p.L / (p.E * p.h * p.h * p.h * p.b);
}

ObjectiveModel tip_deflection_model(const BeamParams& nominal, const std::vector<std::string>& random_names) {
  nominal.validate();
  if (random_names.empty()) throw Error(ErrorKind::Configuration, "no random beam parameters selected");
  std::vector<double> exps;
  for (std::size_t i = 0; i < random_names.size(); ++i) {
    exps.push_back(exponent(random_names[i]));
    for (std::size_t j = 0; j < i; ++j) {
      if (random_names[i] == random_names[j]) {
        throw Error(ErrorKind::Configuration, "beam parameter '" + random_names[i] + "' listed twice");
      }
    }
  }

  const auto assemble = [nominal, random_names](const Eigen::VectorXd& x) {
    BeamParams p = nominal;
    for (std::size_t i = 0; i < random_names.size(); ++i) p.set(random_names[i], x[static_cast<Eigen::Index>(i)]);
    return p;
  };
  const auto deflection = [assemble](const Eigen::VectorXd& x) {
    const BeamParams p = assemble(x);
    return 4.0 * p.F * p.L * p.L * p.L / (p.E * p.h * p.h * p.h * p.b);
  };

  ObjectiveModel model;
  model.dimension = random_names.size();
  model.concurrent_safe = true;
  model.value = deflection;
  model.gradient = [deflection, exps](const Eigen::VectorXd& x) {
    const double w = deflection(x);
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = exps[static_cast<std::size_t>(i)] * w / x[i];
    return g;
  };
  model.hessian = [deflection, exps](const Eigen::VectorXd& x) {
    const double w = deflection(x);
    const Eigen::Index n = x.size();
    Eigen::MatrixXd hm(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double ei = exps[static_cast<std::size_t>(i)];
        const double ej = exps[static_cast<std::size_t>(j)];
        hm(i, j) = ei * (ej - (i == j ? 1.0 : 0.0)) * w / (x[i] * x[j]);
      }
    }
    return hm;
  };
  return model;
}

}  // namespace rfosm::beam
