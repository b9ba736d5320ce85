// Apache License, Version 2.0, refer to LICENSE.txt
//
// Model state for the varying table size Chinese restaurant representation
// and its target log densities: the joint over (partition, weights, surplus,
// parameters), the complete conditionals of the surplus and the size-biased
// weights, the auxiliary-variable decomposition for the stable class, and
// the cluster-parameter updates.

#ifndef PKMC_MODEL_HPP
#define PKMC_MODEL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "pkmc/prior.hpp"
#include "pkmc/random_kit.hpp"

namespace pkmc {

struct Cluster {
  std::vector<int> members;  // observation indices, nonempty
  double weight = 0.0;       // size-biased weight, > 0
  double param = 0.0;        // cluster mean
};

// Occupied clusters in creation order plus the surplus mass V that stands in
// for every unoccupied atom, the Kanter auxiliary Z (stable class), the
// ReUse pool of fresh parameters, and the data.
struct SeatingState {
  std::vector<Cluster> clusters;
  double surplus = 1.0;       // V > 0
  double kanter_z = 0.5;      // Z in (0,1)
  std::vector<double> empty_pool;
  std::vector<double> data;
  std::vector<int> seat;      // observation -> cluster index

  int n() const { return static_cast<int>(data.size()); }
  int k() const { return static_cast<int>(clusters.size()); }
  double sum_weights() const;
  double total_mass() const { return surplus + sum_weights(); }

  // Throws std::invalid_argument when any invariant fails: the member sets
  // must partition {0..n-1} consistently with `seat`, weights and surplus
  // must be positive, Z in (0,1), and the pool nonempty.
  void validate() const;
};

// Per-iteration snapshot for diagnostics and trace output.
struct TraceRecord {
  long iteration = 0;
  int k = 0;
  double surplus = 0.0;
  double total = 0.0;
  double log_joint = 0.0;
  std::vector<int> cluster_sizes;
  double seconds = 0.0;
  int mh_accepted = 1;  // 1 for slice variants; 0/1 for the MH surplus step
};

// Interpretation of the size-biased support indicator in the weight
// conditional. `unbounded` reads the indicator at the candidate value, where
// it always holds; `surpmass` truncates at the bound computed from the
// stored state. See weight_upper_bound.
enum class WeightBoundPolicy { unbounded, surpmass };

// Surpmass_i = V + sum_{j >= i} weight_j, from the live cluster order.
double weight_upper_bound(const SeatingState& state, std::size_t i);

// Restores the least-element cluster order (blocks sorted by their smallest
// observation) and rebuilds the seat map. The sweep's sequential weight scan
// must follow an order that is a function of the state alone; an order
// inherited from the reassignment history correlates with the history's
// conditional deviations and breaks invariance of the composed sweep.
void canonicalize_cluster_order(SeatingState& state);

// Unnormalized log of the full joint (Eq. 4 form):
//   -n log(v + S) + log h(v + S) + log f_rho(v)
//   + sum_k [ |c_k| log s_k + log rho(s_k) + log H0(y*_k) + sum_{i in c_k} log F(x_i | y*_k) ].
// prior_only drops the observation terms.
double log_joint(const SeatingState& state, const PriorSpec& prior,
                 const LikelihoodSpec& lik, bool prior_only = false);

// log P(V in dv | rest) propto -n log(v+S) + log f_rho(v) + log h(v+S).
double log_cond_surplus(double v, const SeatingState& state, const PriorSpec& prior);

// Stable class only, the (V, Z) joint of the Kanter representation:
//   -n log(v+S) - (1/(1-sigma)) log v + log A(z)
//   - v^{-sigma/(1-sigma)} A(z) + log h(v+S).
// As a function of v at fixed z this is the surplus conditional; integrating
// exp of it over z recovers log_cond_surplus up to one constant.
double log_cond_surplus_aux(double v, double z, const SeatingState& state,
                            const PriorSpec& prior);

// log P(Z in dz | rest) propto log A(z) - v^{-sigma/(1-sigma)} A(z).
double log_cond_z(double z, double v, const PriorSpec& prior);

// log conditional of occupied weight i at candidate value s.
double log_cond_weight(double s, std::size_t i, const SeatingState& state,
                       const PriorSpec& prior,
                       WeightBoundPolicy policy = WeightBoundPolicy::unbounded);

// Log reassignment scores for observation i (already detached): one entry
// per occupied cluster, log[s_c F(x_i | y*_c)], then one per pool slot,
// log[(v/M) F(x_i | y^e_j)]. prior_only drops the F factors.
std::vector<double> log_predictive_weights(int i, const SeatingState& state,
                                           const LikelihoodSpec& lik,
                                           bool prior_only = false);

enum class ParamUpdate { conjugate, slice };

// Redraw every cluster mean from its full conditional given the members:
// closed-form Normal posterior, or a slice transition for the generic
// non-conjugate path. Both leave the same conditional invariant.
void update_cluster_params(SeatingState& state, const LikelihoodSpec& lik,
                           RngStream& rng,
                           ParamUpdate method = ParamUpdate::conjugate);

}  // namespace pkmc

#endif
