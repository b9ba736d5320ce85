// Apache License, Version 2.0, refer to LICENSE.txt
//
// Correctness harnesses and chain diagnostics: ESS with Geyer truncation,
// the Pitman-Yor EPPF oracle, the exact generative process of the prior,
// the Geweke joint-distribution test, and Kolmogorov-Smirnov helpers.

#ifndef PKMC_DIAGNOSTICS_HPP
#define PKMC_DIAGNOSTICS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pkmc/sampler.hpp"

namespace pkmc {

struct EssReport {
  std::string statistic;
  long n = 0;
  double ess = 0.0;
  long cutoff_lag = 0;   // last autocorrelation lag used
  bool degenerate = false;
};

// ESS = N / (1 + 2 sum rho_t) with the initial monotone positive sequence
// truncation of the autocorrelation estimates. Requires length >= 100; a
// constant series reports ESS = 1 with the degenerate flag set.
EssReport ess(std::span<const double> series, std::string name = "");

// Exact Pitman-Yor EPPF of an unordered partition with the given block sizes.
double py_eppf(const std::vector<int>& block_sizes, double theta, double sigma);

// Canonical text key of the set partition given by per-observation labels:
// blocks ordered by least element, e.g. "01|2".
std::string canonical_partition(const std::vector<int>& labels);

struct ForwardDraw {
  std::vector<int> labels;      // observation -> cluster, creation order
  std::vector<double> weights;  // size-biased weights
  std::vector<double> params;   // cluster parameters, iid from H0
  double total_mass = 0.0;
  double surplus = 0.0;         // total_mass - sum(weights)
};

// Exact forward simulation of the generative process: T from gamma, then
// sequential size-biased assignment, new masses from the transition kernel.
// Cluster parameters are drawn iid from H0 when a likelihood is supplied.
ForwardDraw forward_generate(const PriorSpec& prior, int n, RngStream& rng,
                             const LikelihoodSpec* lik = nullptr);

// One draw of the total mass T ~ gamma(dt) propto h(t) f_rho(t) dt.
//   normalized stable: plain stable draw; NGG: exponentially tilted stable;
//   Pitman-Yor theta > 0: gamma-mixture of exponential tilts; -logBeta: -log Beta.
double sample_total_mass(const PriorSpec& prior, RngStream& rng);

struct GewekeStat {
  std::string name;
  double mean_marginal = 0.0;
  double mean_successive = 0.0;
  double z = 0.0;
  double ess_successive = 0.0;
};

struct GewekeReport {
  std::vector<GewekeStat> stats;
  long marginal_samples = 0;
  long sweeps = 0;
  double max_abs_z = 0.0;
  double min_ess = 0.0;
  bool aborted = false;          // successive chain failed numerically
  std::string abort_reason;
  bool pass(double z_max = 4.0) const { return !aborted && max_abs_z < z_max; }
  std::string to_string() const;
};

struct GewekeConfig {
  int n_obs = 8;
  long marginal_samples = 100000;
  long min_effective = 10000;  // grow the successive chain until every
                               // statistic reaches this ESS
  long max_sweeps = 2000000;
  long chunk = 20000;
  GibbsConfig gibbs;
};

// Marginal-conditional versus successive-conditional comparison of the
// monitored statistics (K, T, V, mean weight, data moments), standardized
// with spectral-variance-corrected standard errors.
GewekeReport geweke_test(const PriorSpec& prior, const LikelihoodSpec& lik,
                         const GewekeConfig& cfg, RngStream& rng);

struct PriorCheckRow {
  std::string partition;
  double oracle = 0.0;
  double chain_freq = 0.0;
  double chain_se = 0.0;
  double forward_freq = 0.0;
  double forward_se = 0.0;
  bool ok = false;
};

struct PriorCheckReport {
  std::vector<PriorCheckRow> rows;
  long sweeps = 0;
  long forward_draws = 0;
  bool pass = false;
  std::string to_string() const;
};

// Prior-only hybrid chains and the forward generator against the Pitman-Yor
// EPPF, every partition of [n] within 3 MC standard errors.
PriorCheckReport prior_check(double theta, double sigma, int n, long sweeps,
                             long forward_draws, RngStream& rng);

// Kolmogorov-Smirnov utilities (sorted inputs).
double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> sorted_a,
                     std::span<const double> sorted_b);
// Asymptotic two-sided p-value with the Stephens small-sample correction;
// n_eff = n for one sample, n m/(n+m) for two samples.
double ks_p_value(double d, double n_eff);

}  // namespace pkmc

#endif
