// Apache License, Version 2.0, refer to LICENSE.txt
//
// Log-space evaluation of the special functions behind Poisson-Kingman
// priors: the positive sigma-stable density (series and Kanter integral),
// the Zolotarev function A, the stable and -logBeta Levy densities, the
// -logBeta total-mass density, and the tilting functions h.

#ifndef PKMC_STABLE_MATH_HPP
#define PKMC_STABLE_MATH_HPP

#include <optional>
#include <utility>

namespace pkmc {

// Index of a positive sigma-stable law, Laplace transform exp(-lambda^sigma).
// Only sigma in (0.05, 0.95) is accepted: both the series and the quadrature
// degrade outside that window.
struct SigmaStableParams {
  double sigma;
  // Optional exact rational form sigma = u/v with u < v coprime.
  std::optional<std::pair<int, int>> rational;

  explicit SigmaStableParams(double sigma_);
  SigmaStableParams(int u, int v);
};

struct LogBetaParams {
  double a;  // > 0
  double b;  // >= 1
  LogBetaParams(double a_, double b_);
};

// Tilting function h(t) selecting a member of the sigma-stable PK class,
// gamma(dt) proportional to h(t) f_rho(t) dt. Unnormalized on purpose: the
// sampler only ever uses h through ratios.
struct TiltFunction {
  enum class Kind { pitman_yor, normalized_stable, ngg, logbeta_unit };
  Kind kind = Kind::normalized_stable;
  double theta = 0.0;  // Pitman-Yor, theta > -sigma
  double tau = 0.0;    // NGG, tau > 0

  static TiltFunction pitman_yor(double theta);
  static TiltFunction normalized_stable();
  static TiltFunction ngg(double tau);
  static TiltFunction logbeta_unit();
};

// log f_sigma(t) via the alternating series, partial sums tracked in
// sign/log-magnitude space. Falls back to the Kanter quadrature when the
// series hits max_terms or loses more than 8 decimal digits to cancellation.
double log_f_sigma(double t, const SigmaStableParams& p, double tol = 1e-12,
                   int max_terms = 400);

// log f_sigma(t) through the Kanter integral representation,
//   f(t) = sigma/(1-sigma) t^{-1/(1-sigma)} int_0^1 A(z) exp(-t^{-sigma/(1-sigma)} A(z)) dz.
double log_f_sigma_quadrature(double t, const SigmaStableParams& p);

// Zolotarev's function on z in (0,1):
//   A(z) = sin(sigma pi z)^{sigma/(1-sigma)} sin((1-sigma) pi z) / sin(pi z)^{1/(1-sigma)}.
// Strictly increasing, finite limit at 0, diverges at 1.
double zolotarev_A(double z, const SigmaStableParams& p);
double log_zolotarev_A(double z, const SigmaStableParams& p);

// log of the sigma-stable Levy density sigma/Gamma(1-sigma) x^{-sigma-1}.
double log_levy_sigma(double x, const SigmaStableParams& p);

// log of the -logBeta total-mass density
//   Gamma(a+b)/(Gamma(a)Gamma(b)) exp(-a t) (1-exp(-t))^{b-1}.
double log_f_logbeta(double t, const LogBetaParams& p);

// log of the -logBeta Levy density exp(-a x)(1-exp(-b x)) / (x (1-exp(-x))).
double log_levy_logbeta(double x, const LogBetaParams& p);

// Unnormalized log h(t). Pitman-Yor: -theta log t. Normalized stable: 0.
// NGG(tau): -tau^{1/sigma} t. LogBetaUnit: 0.
double log_h(double t, const TiltFunction& tilt, const SigmaStableParams& p);

// The exponential tilt rate tau^{1/sigma} used by the NGG h-function.
double ngg_tilt_rate(const TiltFunction& tilt, const SigmaStableParams& p);

namespace detail {
// log f_sigma through a lazily built interpolation table over log t, accurate
// to ~1e-9 on t in [1e-8, 1e8] and exact outside. For bulk tabulation in the
// samplers; the analysis-grade entry point is log_f_sigma.
double log_f_sigma_cached(double t, const SigmaStableParams& p);
}  // namespace detail

}  // namespace pkmc

#endif
