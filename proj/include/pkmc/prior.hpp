// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef PKMC_PRIOR_HPP
#define PKMC_PRIOR_HPP

#include <string>

#include "pkmc/stable_math.hpp"

namespace pkmc {

// Which Poisson-Kingman prior the model runs under: a member of the
// sigma-stable class selected by a tilt h, or the -logBeta(a,b) class.
struct PriorSpec {
  enum class Family { stable, log_beta };

  Family family = Family::stable;
  SigmaStableParams stable_params{0.5};
  TiltFunction tilt = TiltFunction::normalized_stable();
  LogBetaParams logbeta_params{1.0, 1.0};

  static PriorSpec pitman_yor(double theta, double sigma);
  static PriorSpec normalized_stable(double sigma);
  static PriorSpec ngg(double tau, double sigma);
  static PriorSpec log_beta(double a, double b);

  bool is_stable() const { return family == Family::stable; }
  double sigma() const { return stable_params.sigma; }

  // log f_rho(t), the total-mass density under the untilted CRM.
  double log_total_mass_density(double t) const;
  // log rho(x), the Levy density.
  double log_levy(double x) const;
  // log(x rho(x)); finite as x -> 0 for the -logBeta class.
  double log_levy_x(double x) const;
  // log h(t), unnormalized tilt.
  double log_tilt(double t) const;

  std::string describe() const;
};

// Normal likelihood with Normal base distribution:
//   H0 = N(mu0, sigma0_sq), F(x | mu) = N(x | mu, sigma1_sq).
struct LikelihoodSpec {
  double mu0 = 0.0;
  double sigma0_sq = 1.0;
  double sigma1_sq = 1.0;

  LikelihoodSpec() = default;
  LikelihoodSpec(double mu0_, double sigma0_sq_, double sigma1_sq_);

  double log_base(double y) const;               // log H0(y)
  double log_obs(double x, double y) const;      // log F(x | y)
};

}  // namespace pkmc

#endif
