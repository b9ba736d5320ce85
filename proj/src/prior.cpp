// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/prior.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pkmc {

PriorSpec PriorSpec::pitman_yor(double theta, double sigma) {
  PriorSpec p;
  p.family = Family::stable;
  p.stable_params = SigmaStableParams(sigma);
  if (!(theta > -sigma)) throw std::domain_error("Pitman-Yor requires theta > -sigma");
  p.tilt = TiltFunction::pitman_yor(theta);
  return p;
}

PriorSpec PriorSpec::normalized_stable(double sigma) {
  PriorSpec p;
  p.family = Family::stable;
  p.stable_params = SigmaStableParams(sigma);
  p.tilt = TiltFunction::normalized_stable();
  return p;
}

PriorSpec PriorSpec::ngg(double tau, double sigma) {
  PriorSpec p;
  p.family = Family::stable;
  p.stable_params = SigmaStableParams(sigma);
  p.tilt = TiltFunction::ngg(tau);
  return p;
}

PriorSpec PriorSpec::log_beta(double a, double b) {
  PriorSpec p;
  p.family = Family::log_beta;
  p.logbeta_params = LogBetaParams(a, b);
  p.tilt = TiltFunction::logbeta_unit();
  return p;
}

double PriorSpec::log_total_mass_density(double t) const {
  return is_stable() ? log_f_sigma(t, stable_params) : log_f_logbeta(t, logbeta_params);
}

double PriorSpec::log_levy(double x) const {
  return is_stable() ? log_levy_sigma(x, stable_params) : log_levy_logbeta(x, logbeta_params);
}

double PriorSpec::log_levy_x(double x) const {
  if (is_stable())
    return std::log(stable_params.sigma) - std::lgamma(1.0 - stable_params.sigma) -
           stable_params.sigma * std::log(x);
  // x rho(x) = e^{-a x}(1 - e^{-b x}) / (1 - e^{-x}), finite (-> b) at 0.
  const auto& p = logbeta_params;
  return -p.a * x + std::log(-std::expm1(-p.b * x)) - std::log(-std::expm1(-x));
}

double PriorSpec::log_tilt(double t) const {
  return log_h(t, tilt, stable_params);
}

std::string PriorSpec::describe() const {
  std::ostringstream os;
  if (family == Family::log_beta) {
    os << "-logBeta(a=" << logbeta_params.a << ", b=" << logbeta_params.b << ")";
    return os.str();
  }
  switch (tilt.kind) {
    case TiltFunction::Kind::pitman_yor:
      os << "Pitman-Yor(theta=" << tilt.theta << ", sigma=" << stable_params.sigma << ")";
      break;
    case TiltFunction::Kind::normalized_stable:
      os << "Normalized Stable(sigma=" << stable_params.sigma << ")";
      break;
    case TiltFunction::Kind::ngg:
      os << "NGG(tau=" << tilt.tau << ", sigma=" << stable_params.sigma << ")";
      break;
    case TiltFunction::Kind::logbeta_unit:
      os << "stable(sigma=" << stable_params.sigma << ")";
      break;
  }
  return os.str();
}

LikelihoodSpec::LikelihoodSpec(double mu0_, double sigma0_sq_, double sigma1_sq_)
    : mu0(mu0_), sigma0_sq(sigma0_sq_), sigma1_sq(sigma1_sq_) {
  if (!(sigma0_sq > 0.0) || !(sigma1_sq > 0.0))
    throw std::domain_error("likelihood variances must be positive");
}

namespace {
double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}
}  // namespace

double LikelihoodSpec::log_base(double y) const { return log_normal_pdf(y, mu0, sigma0_sq); }

double LikelihoodSpec::log_obs(double x, double y) const {
  return log_normal_pdf(x, y, sigma1_sq);
}

}  // namespace pkmc
