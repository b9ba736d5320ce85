// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pkmc {

namespace {

double draw_base(const LikelihoodSpec& lik, RngStream& rng) {
  return lik.mu0 + rng.normal01() * std::sqrt(lik.sigma0_sq);
}

// Log-space categorical draw.
std::size_t pick_category(const std::vector<double>& log_scores, RngStream& rng) {
  const double m = *std::max_element(log_scores.begin(), log_scores.end());
  double total = 0.0;
  for (double s : log_scores) total += std::exp(s - m);
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i + 1 < log_scores.size(); ++i) {
    u -= std::exp(log_scores[i] - m);
    if (u <= 0.0) return i;
  }
  return log_scores.size() - 1;
}

}  // namespace

double mh_surplus_log_ratio(double v, double vp, double sum_weights, int n,
                            double lambda, const PriorSpec& prior) {
  const double s = sum_weights;
  return (-n * std::log(vp + s) + prior.log_tilt(vp + s) - lambda * v) -
         (-n * std::log(v + s) + prior.log_tilt(v + s) - lambda * vp);
}

void GibbsConfig::validate(const PriorSpec& prior) const {
  if (pool_size < 1) throw std::invalid_argument("pool size M must be >= 1");
  if (variant == SamplerVariant::direct_slice && prior.is_stable())
    throw std::invalid_argument("direct-slice surplus update requires the -logBeta class");
  if (variant != SamplerVariant::direct_slice && !prior.is_stable())
    throw std::invalid_argument("-logBeta priors must use the direct-slice variant");
  if (!(mh_lambda >= 0.0)) throw std::invalid_argument("mh lambda must be >= 0");
}

SeatingState init_state(std::vector<double> data, const PriorSpec& prior,
                        const LikelihoodSpec& lik, const GibbsConfig& cfg,
                        RngStream& rng) {
  cfg.validate(prior);
  SeatingState state;
  state.data = std::move(data);
  state.seat.assign(state.data.size(), 0);
  state.empty_pool.resize(cfg.pool_size);
  for (auto& y : state.empty_pool) y = draw_base(lik, rng);

  const double budget = prior.is_stable()
                            ? sample_positive_stable(prior.stable_params, rng)
                            : -std::log(sample_beta(prior.logbeta_params.a,
                                                    prior.logbeta_params.b, rng));
  if (state.data.empty()) {
    state.surplus = budget;
  } else {
    Cluster c;
    c.members.resize(state.data.size());
    std::iota(c.members.begin(), c.members.end(), 0);
    c.weight = sample_new_weight(budget, prior, rng);
    c.param = draw_base(lik, rng);
    state.surplus = budget - c.weight;
    state.clusters.push_back(std::move(c));
  }
  state.kanter_z = prior.is_stable()
                       ? sample_kanter_z(state.surplus, prior.stable_params, rng)
                       : 0.5;
  state.validate();
  return state;
}

int update_surplus(SeatingState& state, const PriorSpec& prior, const GibbsConfig& cfg,
                   RngStream& rng, MhCounters* mh) {
  // Positive-scale variables are slice-sampled in log space with a fixed
  // width: scale-free moves with a state-independent kernel, which the
  // invariance of the slice sampler requires.
  switch (cfg.variant) {
    case SamplerVariant::slice_aux: {
      // Z is refreshed from its exact conditional and treated as local to
      // this update. A Z that persisted across the reassignment step would
      // decouple from V there (the reassignment moves V under the
      // z-marginal target), and the composite chain would drift off the
      // joint; an exact refresh makes the z-v pair a marginal kernel for V.
      state.kanter_z = sample_kanter_z(state.surplus, prior.stable_params, rng);
      SliceConfig vc;
      vc.width = cfg.log_slice_width;
      vc.max_steps = cfg.slice_max_steps;
      const double z = state.kanter_z;
      const double lx = slice_sample(
          [&](double x) { return log_cond_surplus_aux(std::exp(x), z, state, prior) + x; },
          std::log(state.surplus), vc, rng);
      state.surplus = std::exp(lx);
      return 1;
    }
    case SamplerVariant::mh_stable: {
      const double lambda = cfg.mh_lambda;
      const double v = state.surplus;
      const double vp = sample_tilted_stable(prior.stable_params, lambda, rng);
      const double log_r =
          mh_surplus_log_ratio(v, vp, state.sum_weights(), state.n(), lambda, prior);
      if (mh) ++mh->proposed;
      if (std::log(rng.uniform01()) < log_r) {
        state.surplus = vp;
        if (mh) ++mh->accepted;
        return 1;
      }
      return 0;
    }
    case SamplerVariant::direct_slice: {
      SliceConfig vc;
      vc.width = cfg.log_slice_width;
      vc.max_steps = cfg.slice_max_steps;
      const double lx = slice_sample(
          [&](double x) { return log_cond_surplus(std::exp(x), state, prior) + x; },
          std::log(state.surplus), vc, rng);
      state.surplus = std::exp(lx);
      return 1;
    }
  }
  throw std::logic_error("update_surplus: unreachable");
}

void update_weights(SeatingState& state, const PriorSpec& prior, const GibbsConfig& cfg,
                    RngStream& rng) {
  for (std::size_t i = 0; i < state.clusters.size(); ++i) {
    SliceConfig sc;
    sc.width = cfg.log_slice_width;
    sc.max_steps = cfg.slice_max_steps;
    if (cfg.weight_bound == WeightBoundPolicy::surpmass)
      sc.upper = std::log(weight_upper_bound(state, i));
    const double lx = slice_sample(
        [&](double x) {
          return log_cond_weight(std::exp(x), i, state, prior, cfg.weight_bound) + x;
        },
        std::log(state.clusters[i].weight), sc, rng);
    double s = std::exp(lx);
    if (cfg.fault == FaultInjection::double_weights) s *= 2.0;
    state.clusters[i].weight = s;
  }
}

void reassign_all(SeatingState& state, const PriorSpec& prior, const LikelihoodSpec& lik,
                  const GibbsConfig& cfg, RngStream& rng) {
  const int n = state.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (cfg.scan_order == ScanOrder::random_permutation) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(rng.uniform_index(i + 1))]);
  }

  const std::size_t m = state.empty_pool.size();
  for (int i : order) {
    // Detach observation i; an emptied cluster returns its weight to the
    // surplus and recycles its parameter into a random pool slot.
    const int ci = state.seat[i];
    auto& members = state.clusters[ci].members;
    members.erase(std::find(members.begin(), members.end(), i));
    if (members.empty()) {
      const std::size_t slot = state.empty_pool.size() == 1
                                   ? 0
                                   : static_cast<std::size_t>(rng.uniform_index(m));
      state.empty_pool[slot] = state.clusters[ci].param;
      state.surplus += state.clusters[ci].weight;
      state.clusters.erase(state.clusters.begin() + ci);
      for (auto& sj : state.seat)
        if (sj > ci) --sj;
    }
    state.seat[i] = -1;

    const auto scores = log_predictive_weights(i, state, lik, cfg.prior_only);
    const std::size_t pick = pick_category(scores, rng);
    const std::size_t k = state.clusters.size();
    if (pick < k) {
      state.clusters[pick].members.push_back(i);
      state.seat[i] = static_cast<int>(pick);
    } else {
      const std::size_t slot = pick - k;
      const double w_new = sample_new_weight(state.surplus, prior, rng);
      if (!(w_new > 0.0 && w_new < state.surplus))
        throw std::runtime_error("reassign_all: new weight escaped (0, surplus)");
      state.surplus -= w_new;
      Cluster c;
      c.members.push_back(i);
      c.weight = w_new;
      c.param = state.empty_pool[slot];
      state.clusters.push_back(std::move(c));
      state.seat[i] = static_cast<int>(k);
      state.empty_pool[slot] = draw_base(lik, rng);
    }
    if (cfg.pool_refresh == PoolRefresh::per_obs)
      for (auto& y : state.empty_pool) y = draw_base(lik, rng);
  }
  canonicalize_cluster_order(state);
}

TraceRecord gibbs_sweep(SeatingState& state, const PriorSpec& prior,
                        const LikelihoodSpec& lik, const GibbsConfig& cfg,
                        RngStream& rng, long iteration, MhCounters* mh) {
  const auto t0 = std::chrono::steady_clock::now();
  TraceRecord rec;
  rec.mh_accepted = update_surplus(state, prior, cfg, rng, mh);
  update_weights(state, prior, cfg, rng);
  reassign_all(state, prior, lik, cfg, rng);
  if (cfg.prior_only) {
    for (auto& c : state.clusters) c.param = draw_base(lik, rng);
  } else {
    update_cluster_params(state, lik, rng, cfg.param_update);
  }

  rec.iteration = iteration;
  rec.k = state.k();
  rec.surplus = state.surplus;
  rec.total = state.total_mass();
  rec.log_joint = log_joint(state, prior, lik, cfg.prior_only);
  rec.cluster_sizes.reserve(state.clusters.size());
  for (const auto& c : state.clusters)
    rec.cluster_sizes.push_back(static_cast<int>(c.members.size()));
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace pkmc
