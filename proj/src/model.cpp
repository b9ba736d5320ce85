// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pkmc/slice.hpp"

namespace pkmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double SeatingState::sum_weights() const {
  double s = 0.0;
  for (const auto& c : clusters) s += c.weight;
  return s;
}

void SeatingState::validate() const {
  if (!(surplus > 0.0)) throw std::invalid_argument("state: surplus must be positive");
  if (!(kanter_z > 0.0 && kanter_z < 1.0))
    throw std::invalid_argument("state: kanter_z must lie in (0,1)");
  if (empty_pool.empty()) throw std::invalid_argument("state: empty pool must have M >= 1 slots");
  if (seat.size() != data.size()) throw std::invalid_argument("state: seat/data size mismatch");

  std::vector<char> seen(data.size(), 0);
  for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
    const auto& c = clusters[ci];
    if (c.members.empty()) throw std::invalid_argument("state: empty cluster");
    if (!(c.weight > 0.0)) throw std::invalid_argument("state: non-positive weight");
    if (!std::isfinite(c.weight) || !std::isfinite(c.param))
      throw std::invalid_argument("state: non-finite cluster fields");
    for (int i : c.members) {
      if (i < 0 || i >= n()) throw std::invalid_argument("state: member index out of range");
      if (seen[i]) throw std::invalid_argument("state: observation in two clusters");
      seen[i] = 1;
      if (seat[i] != static_cast<int>(ci))
        throw std::invalid_argument("state: seat inconsistent with members");
    }
  }
  for (int i = 0; i < n(); ++i)
    if (!seen[i]) throw std::invalid_argument("state: observation unassigned");
  if (!(total_mass() > 0.0) || !std::isfinite(total_mass()))
    throw std::invalid_argument("state: total mass must be positive and finite");
}

double weight_upper_bound(const SeatingState& state, std::size_t i) {
  if (i >= state.clusters.size()) throw std::invalid_argument("weight bound: bad cluster index");
  double bound = state.surplus;
  for (std::size_t j = i; j < state.clusters.size(); ++j) bound += state.clusters[j].weight;
  return bound;
}

void canonicalize_cluster_order(SeatingState& state) {
  std::stable_sort(state.clusters.begin(), state.clusters.end(),
                   [](const Cluster& a, const Cluster& b) {
                     return *std::min_element(a.members.begin(), a.members.end()) <
                            *std::min_element(b.members.begin(), b.members.end());
                   });
  for (std::size_t k = 0; k < state.clusters.size(); ++k)
    for (int i : state.clusters[k].members) state.seat[i] = static_cast<int>(k);
}

double log_joint(const SeatingState& state, const PriorSpec& prior,
                 const LikelihoodSpec& lik, bool prior_only) {
  state.validate();
  const double total = state.total_mass();
  double lp = -state.n() * std::log(total) + prior.log_tilt(total) +
              prior.log_total_mass_density(state.surplus);
  for (const auto& c : state.clusters) {
    lp += static_cast<double>(c.members.size()) * std::log(c.weight) +
          prior.log_levy(c.weight);
    lp += lik.log_base(c.param);
    if (!prior_only)
      for (int i : c.members) lp += lik.log_obs(state.data[i], c.param);
  }
  return lp;
}

double log_cond_surplus(double v, const SeatingState& state, const PriorSpec& prior) {
  if (!(v > 0.0)) return kNegInf;
  const double total = v + state.sum_weights();
  return -state.n() * std::log(total) + prior.log_total_mass_density(v) +
         prior.log_tilt(total);
}

double log_cond_surplus_aux(double v, double z, const SeatingState& state,
                            const PriorSpec& prior) {
  if (!prior.is_stable())
    throw std::invalid_argument("log_cond_surplus_aux: stable class only");
  if (!(v > 0.0) || !(z > 0.0 && z < 1.0)) return kNegInf;
  const double sigma = prior.sigma();
  const double total = v + state.sum_weights();
  const double log_a = log_zolotarev_A(z, prior.stable_params);
  // Joint (V, Z) terms of the Kanter representation of f_sigma; the
  // v-exponent is -1/(1-sigma), so integrating out z recovers
  // log_cond_surplus up to one v-independent constant.
  return -state.n() * std::log(total) - std::log(v) / (1.0 - sigma) + log_a -
         std::pow(v, -sigma / (1.0 - sigma)) * std::exp(log_a) + prior.log_tilt(total);
}

double log_cond_z(double z, double v, const PriorSpec& prior) {
  if (!prior.is_stable()) throw std::invalid_argument("log_cond_z: stable class only");
  if (!(z > 0.0 && z < 1.0) || !(v > 0.0)) return kNegInf;
  const double sigma = prior.sigma();
  const double log_a = log_zolotarev_A(z, prior.stable_params);
  return log_a - std::pow(v, -sigma / (1.0 - sigma)) * std::exp(log_a);
}

double log_cond_weight(double s, std::size_t i, const SeatingState& state,
                       const PriorSpec& prior, WeightBoundPolicy policy) {
  if (i >= state.clusters.size())
    throw std::invalid_argument("log_cond_weight: bad cluster index");
  if (!(s > 0.0)) return kNegInf;
  if (policy == WeightBoundPolicy::surpmass && s >= weight_upper_bound(state, i))
    return kNegInf;
  double rest = state.surplus;
  for (std::size_t j = 0; j < state.clusters.size(); ++j)
    if (j != i) rest += state.clusters[j].weight;
  const double total = rest + s;
  const double size = static_cast<double>(state.clusters[i].members.size());
  return -state.n() * std::log(total) + prior.log_tilt(total) + size * std::log(s) +
         prior.log_levy(s);
}

std::vector<double> log_predictive_weights(int i, const SeatingState& state,
                                           const LikelihoodSpec& lik, bool prior_only) {
  const double x = state.data.empty() ? 0.0 : state.data[i];
  std::vector<double> scores;
  scores.reserve(state.clusters.size() + state.empty_pool.size());
  for (const auto& c : state.clusters) {
    double sc = std::log(c.weight);
    if (!prior_only) sc += lik.log_obs(x, c.param);
    scores.push_back(sc);
  }
  const double log_new = std::log(state.surplus) -
                         std::log(static_cast<double>(state.empty_pool.size()));
  for (double y : state.empty_pool) {
    double sc = log_new;
    if (!prior_only) sc += lik.log_obs(x, y);
    scores.push_back(sc);
  }
  return scores;
}

void update_cluster_params(SeatingState& state, const LikelihoodSpec& lik,
                           RngStream& rng, ParamUpdate method) {
  for (auto& c : state.clusters) {
    if (method == ParamUpdate::conjugate) {
      double sum = 0.0;
      for (int i : c.members) sum += state.data[i];
      const double prec = 1.0 / lik.sigma0_sq +
                          static_cast<double>(c.members.size()) / lik.sigma1_sq;
      const double mean = (lik.mu0 / lik.sigma0_sq + sum / lik.sigma1_sq) / prec;
      c.param = mean + rng.normal01() / std::sqrt(prec);
    } else {
      const auto target = [&](double y) {
        double lp = lik.log_base(y);
        for (int i : c.members) lp += lik.log_obs(state.data[i], y);
        return lp;
      };
      SliceConfig cfg;
      cfg.width = std::sqrt(lik.sigma1_sq / (1.0 + static_cast<double>(c.members.size())));
      c.param = slice_sample(target, c.param, cfg, rng);
    }
  }
}

}  // namespace pkmc
