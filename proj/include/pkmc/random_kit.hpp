// Apache License, Version 2.0, refer to LICENSE.txt
//
// Nonuniform random generation. Everything here is a deterministic function
// of an RngStream, so a fixed seed reproduces a run bit for bit on the same
// build. Distribution transforms are hand-rolled rather than taken from
// <random>, whose sampling algorithms are implementation-defined.

#ifndef PKMC_RANDOM_KIT_HPP
#define PKMC_RANDOM_KIT_HPP

#include <cstdint>
#include <random>

#include "pkmc/prior.hpp"
#include "pkmc/stable_math.hpp"

namespace pkmc {

// Seedable stream with independent substream spawning. Single-owner: never
// share one stream between threads; spawn a child per chain instead.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Independent child stream; (seed, index) fully determines it.
  RngStream spawn(std::uint64_t index) const;

  std::uint64_t bits();
  std::uint64_t uniform_index(std::uint64_t n);  // uniform on {0,...,n-1}
  double uniform01();                            // open interval (0,1)
  double uniform(double a, double b);
  double normal01();
  double exponential();  // rate 1

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

double sample_gamma(double shape, double rate, RngStream& rng);
// Reciprocal of a Gamma(shape, rate = scale) draw.
double sample_inverse_gamma(double shape, double scale, RngStream& rng);
double sample_beta(double a, double b, RngStream& rng);

// One draw from the positive sigma-stable law with Laplace transform
// exp(-lambda^sigma), by the Kanter transformation of a uniform and a unit
// exponential.
double sample_positive_stable(const SigmaStableParams& p, RngStream& rng);

enum class TiltedMethod { automatic, naive, double_rejection };

// Draw with density proportional to exp(-lambda t) f_sigma(t). The automatic
// policy uses naive rejection while lambda^sigma <= 2 (acceptance
// exp(-lambda^sigma)) and the Devroye-Hofert double-rejection method above.
double sample_tilted_stable(const SigmaStableParams& p, double lambda,
                            RngStream& rng,
                            TiltedMethod method = TiltedMethod::automatic);

// New size-biased weight given the surplus mass, i.e. a draw from
//   P(ds) propto f_rho(v - s) rho(s) s   on (0, v).
//
// sample_new_weight_exact supports sigma = 1/2 only (Gamma/InverseGamma
// identity); other sigma must go through the generic sampler and raise a
// capability error here.
double sample_new_weight_exact(double surplus, const SigmaStableParams& p,
                               RngStream& rng);

// Generic tabulated inverse-CDF sampler for the same conditional, valid for
// every supported prior. For the stable class the substitution
// s = v w^{1/(1-sigma)} absorbs the s^{-sigma} endpoint singularity.
double sample_new_weight_generic(double surplus, const PriorSpec& prior,
                                 RngStream& rng);

// Routes to the exact sigma = 1/2 identity, the -logBeta rejection sampler,
// or the generic inverse-CDF sampler, whichever fits the prior.
double sample_new_weight(double surplus, const PriorSpec& prior, RngStream& rng);

struct RejectionStats {
  long proposals = 0;
  long accepted = 0;
};

// -logBeta new-weight rejection sampler: proposal U(0, v), acceptance
// target(s)/b with target(s) = (1-e^{s-v})^{b-1} (1-e^{-bs}) / (1-e^{-s}).
double sample_new_weight_logbeta(double surplus, const LogBetaParams& p,
                                 RngStream& rng,
                                 RejectionStats* stats = nullptr);

// Exact draw of the Kanter auxiliary variable,
//   P(dz) propto A(z) exp(-v^{-sigma/(1-sigma)} A(z)) on (0,1),
// by rejection from a uniform proposal.
double sample_kanter_z(double v, const SigmaStableParams& p, RngStream& rng);

}  // namespace pkmc

#endif
