// Apache License, Version 2.0, refer to LICENSE.txt
//
// One Gibbs sweep of the hybrid sampler: surplus update (slice with the
// Kanter auxiliary variable, independent-proposal MH, or direct slice),
// sequential weight updates, AddTable&ReUse reassignment, parameter updates.

#ifndef PKMC_SAMPLER_HPP
#define PKMC_SAMPLER_HPP

#include "pkmc/model.hpp"
#include "pkmc/slice.hpp"

namespace pkmc {

enum class SamplerVariant {
  slice_aux,    // stable class, slice V and the Kanter Z
  mh_stable,    // stable class, MH with (tilted) stable independent proposal
  direct_slice  // -logBeta class, slice V against the tractable f_rho
};

enum class ScanOrder { fixed, random_permutation };
enum class PoolRefresh { per_obs, per_slot };
enum class FaultInjection { none, double_weights };  // Geweke harness sensitivity

struct GibbsConfig {
  SamplerVariant variant = SamplerVariant::slice_aux;
  double mh_lambda = 0.0;       // tilt of the MH proposal; 0 = plain stable
  int pool_size = 3;            // M
  bool prior_only = false;      // likelihood identically constant
  ScanOrder scan_order = ScanOrder::fixed;
  PoolRefresh pool_refresh = PoolRefresh::per_obs;
  ParamUpdate param_update = ParamUpdate::conjugate;
  WeightBoundPolicy weight_bound = WeightBoundPolicy::unbounded;
  int slice_max_steps = 32;
  double log_slice_width = 1.0;  // fixed width for log-space moves of V, weights
  double z_slice_width = 0.1;
  FaultInjection fault = FaultInjection::none;

  void validate(const PriorSpec& prior) const;  // throws on mismatched variant
};

struct MhCounters {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed > 0 ? double(accepted) / double(proposed) : 0.0; }
};

// Single cluster holding every observation; V from the untilted total-mass
// law, the first weight from the new-weight sampler given the V + J budget.
SeatingState init_state(std::vector<double> data, const PriorSpec& prior,
                        const LikelihoodSpec& lik, const GibbsConfig& cfg,
                        RngStream& rng);

// Log acceptance ratio of the independent-proposal MH surplus move from v to
// vp with proposal density proportional to exp(-lambda t) f_sigma(t): the
// f_sigma factors cancel, leaving the restaurant factor, the tilt, and the
// proposal tilt correction.
double mh_surplus_log_ratio(double v, double vp, double sum_weights, int n,
                            double lambda, const PriorSpec& prior);

// Returns 1 if an MH proposal was accepted this call, 0 if rejected,
// 1 for the slice variants.
int update_surplus(SeatingState& state, const PriorSpec& prior,
                   const GibbsConfig& cfg, RngStream& rng,
                   MhCounters* mh = nullptr);

void update_weights(SeatingState& state, const PriorSpec& prior,
                    const GibbsConfig& cfg, RngStream& rng);

// AddTable&ReUse over all observations in scan order.
void reassign_all(SeatingState& state, const PriorSpec& prior,
                  const LikelihoodSpec& lik, const GibbsConfig& cfg,
                  RngStream& rng);

TraceRecord gibbs_sweep(SeatingState& state, const PriorSpec& prior,
                        const LikelihoodSpec& lik, const GibbsConfig& cfg,
                        RngStream& rng, long iteration, MhCounters* mh = nullptr);

}  // namespace pkmc

#endif
