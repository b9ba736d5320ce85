// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pkmc {

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  return {m, s2 / n};
}

}  // namespace

EssReport ess(std::span<const double> series, std::string name) {
  EssReport rep;
  rep.statistic = std::move(name);
  rep.n = static_cast<long>(series.size());
  if (rep.n < 100) throw std::invalid_argument("ess: series must have length >= 100");

  const auto mom = moments(series);
  // Constant up to summation roundoff counts as degenerate.
  if (!(mom.var > 1e-24 * std::max(1.0, mom.mean * mom.mean)) ||
      !std::isfinite(mom.var)) {
    rep.ess = 1.0;
    rep.degenerate = true;
    rep.cutoff_lag = 0;
    return rep;
  }

  const long n = rep.n;
  const auto rho = [&](long lag) {
    double c = 0.0;
    for (long i = 0; i + lag < n; ++i)
      c += (series[i] - mom.mean) * (series[i + lag] - mom.mean);
    return c / (static_cast<double>(n) * mom.var);
  };

  // Geyer's initial monotone positive sequence over pair sums
  // Gamma_m = rho(2m) + rho(2m+1).
  double pair_sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  long last_lag = 0;
  for (long m = 0; 2 * m + 1 < n - 1; ++m) {
    double g = rho(2 * m) + rho(2 * m + 1);
    if (g <= 0.0) break;
    g = std::min(g, prev);
    prev = g;
    pair_sum += g;
    last_lag = 2 * m + 1;
  }
  const double tau = std::max(2.0 * pair_sum - 1.0, 1e-12);
  rep.cutoff_lag = last_lag;
  rep.ess = std::min(static_cast<double>(n), static_cast<double>(n) / tau);
  return rep;
}

double py_eppf(const std::vector<int>& block_sizes, double theta, double sigma) {
  if (block_sizes.empty()) throw std::invalid_argument("py_eppf: no blocks");
  if (!(sigma >= 0.0 && sigma < 1.0) || !(theta > -sigma))
    throw std::invalid_argument("py_eppf: invalid parameters");
  long n = 0;
  for (int b : block_sizes) {
    if (b < 1) throw std::invalid_argument("py_eppf: block sizes must be positive");
    n += b;
  }
  const long k = static_cast<long>(block_sizes.size());
  double lp = 0.0;
  for (long i = 1; i < k; ++i) lp += std::log(theta + i * sigma);
  for (long j = 1; j < n; ++j) lp -= std::log(theta + j);
  for (int b : block_sizes)
    for (int l = 1; l < b; ++l) lp += std::log(l - sigma);
  return std::exp(lp);
}

std::string canonical_partition(const std::vector<int>& labels) {
  std::map<int, int> order;  // label -> block id by first appearance
  for (int l : labels)
    if (!order.count(l)) {
      const int next = static_cast<int>(order.size());
      order[l] = next;
    }
  std::vector<std::vector<int>> blocks(order.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    blocks[order[labels[i]]].push_back(static_cast<int>(i));
  std::ostringstream os;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) os << '|';
    for (std::size_t j = 0; j < blocks[b].size(); ++j) {
      if (j) os << ',';
      os << blocks[b][j];
    }
  }
  return os.str();
}

double sample_total_mass(const PriorSpec& prior, RngStream& rng) {
  if (!prior.is_stable())
    return -std::log(sample_beta(prior.logbeta_params.a, prior.logbeta_params.b, rng));
  switch (prior.tilt.kind) {
    case TiltFunction::Kind::normalized_stable:
    case TiltFunction::Kind::logbeta_unit:
      return sample_positive_stable(prior.stable_params, rng);
    case TiltFunction::Kind::ngg:
      return sample_tilted_stable(prior.stable_params,
                                  ngg_tilt_rate(prior.tilt, prior.stable_params), rng);
    case TiltFunction::Kind::pitman_yor: {
      const double theta = prior.tilt.theta;
      if (theta == 0.0) return sample_positive_stable(prior.stable_params, rng);
      if (theta < 0.0)
        throw std::runtime_error(
            "sample_total_mass: Pitman-Yor with theta < 0 has no exact total-mass "
            "sampler here");
      // t^{-theta} = integral of exp(-lambda t) against a Gamma(theta) density
      // in lambda, so mixing an exponential tilt over
      // lambda = m^{1/sigma}, m ~ Gamma(theta/sigma, 1) gives an exact draw.
      const double sigma = prior.sigma();
      const double m = sample_gamma(theta / sigma, 1.0, rng);
      return sample_tilted_stable(prior.stable_params, std::pow(m, 1.0 / sigma), rng);
    }
  }
  throw std::logic_error("sample_total_mass: unreachable");
}

ForwardDraw forward_generate(const PriorSpec& prior, int n, RngStream& rng,
                             const LikelihoodSpec* lik) {
  if (n < 0) throw std::invalid_argument("forward_generate: n must be >= 0");
  ForwardDraw d;
  d.total_mass = sample_total_mass(prior, rng);
  d.surplus = d.total_mass;
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01() * d.total_mass;
    int pick = static_cast<int>(d.weights.size());
    for (std::size_t k = 0; k < d.weights.size(); ++k) {
      u -= d.weights[k];
      if (u <= 0.0) {
        pick = static_cast<int>(k);
        break;
      }
    }
    if (pick == static_cast<int>(d.weights.size())) {
      const double w = sample_new_weight(d.surplus, prior, rng);
      d.weights.push_back(w);
      d.surplus -= w;
      if (lik) d.params.push_back(lik->mu0 + rng.normal01() * std::sqrt(lik->sigma0_sq));
    }
    d.labels[i] = pick;
  }
  return d;
}

namespace {

SeatingState state_from_forward(const ForwardDraw& fd, const PriorSpec& prior,
                                const LikelihoodSpec& lik, const GibbsConfig& cfg,
                                RngStream& rng) {
  SeatingState state;
  state.clusters.resize(fd.weights.size());
  for (std::size_t k = 0; k < fd.weights.size(); ++k) {
    state.clusters[k].weight = fd.weights[k];
    state.clusters[k].param = fd.params[k];
  }
  state.seat = fd.labels;
  for (std::size_t i = 0; i < fd.labels.size(); ++i)
    state.clusters[fd.labels[i]].members.push_back(static_cast<int>(i));
  state.surplus = fd.surplus;
  state.kanter_z = prior.is_stable()
                       ? sample_kanter_z(state.surplus, prior.stable_params, rng)
                       : 0.5;
  state.empty_pool.resize(cfg.pool_size);
  for (auto& y : state.empty_pool) y = lik.mu0 + rng.normal01() * std::sqrt(lik.sigma0_sq);
  state.data.assign(fd.labels.size(), 0.0);
  for (std::size_t i = 0; i < fd.labels.size(); ++i)
    state.data[i] = fd.params[fd.labels[i]] + rng.normal01() * std::sqrt(lik.sigma1_sq);
  return state;
}

// T, V and the mean weight enter through logs: for the stable class the raw
// variables have no finite moments, so their z-scores would be meaningless.
std::vector<double> geweke_stats(const SeatingState& state) {
  const int n = state.n();
  if (n == 0) return {std::log(state.total_mass())};
  double sum_x = 0.0, sum_x2 = 0.0;
  for (double x : state.data) {
    sum_x += x;
    sum_x2 += x * x;
  }
  return {static_cast<double>(state.k()),
          std::log(state.total_mass()),
          std::log(state.surplus),
          std::log(state.sum_weights() / state.k()),
          sum_x / n,
          sum_x2 / n};
}

std::vector<std::string> geweke_stat_names(int n) {
  if (n == 0) return {"log_T"};
  return {"K", "log_T", "log_V", "log_mean_weight", "mean_x", "mean_x2"};
}

}  // namespace

GewekeReport geweke_test(const PriorSpec& prior, const LikelihoodSpec& lik,
                         const GewekeConfig& cfg, RngStream& rng) {
  GibbsConfig gibbs = cfg.gibbs;
  gibbs.validate(prior);
  const auto names = geweke_stat_names(cfg.n_obs);
  const std::size_t ns = names.size();

  // Marginal-conditional side: iid draws of (state, data) from the prior.
  std::vector<std::vector<double>> marg(ns);
  RngStream mrng = rng.spawn(1);
  for (long s = 0; s < cfg.marginal_samples; ++s) {
    const ForwardDraw fd = forward_generate(prior, cfg.n_obs, mrng, &lik);
    double sum_x = 0.0, sum_x2 = 0.0;
    for (int i = 0; i < cfg.n_obs; ++i) {
      const double x = fd.params[fd.labels[i]] + mrng.normal01() * std::sqrt(lik.sigma1_sq);
      sum_x += x;
      sum_x2 += x * x;
    }
    if (cfg.n_obs == 0) {
      marg[0].push_back(std::log(fd.total_mass));
    } else {
      double sw = 0.0;
      for (double w : fd.weights) sw += w;
      marg[0].push_back(static_cast<double>(fd.weights.size()));
      marg[1].push_back(std::log(fd.total_mass));
      marg[2].push_back(std::log(fd.surplus));
      marg[3].push_back(std::log(sw / fd.weights.size()));
      marg[4].push_back(sum_x / cfg.n_obs);
      marg[5].push_back(sum_x2 / cfg.n_obs);
    }
  }

  // Successive-conditional side: start from an exact joint draw, then
  // alternate one Gibbs sweep with a data redraw.
  RngStream srng = rng.spawn(2);
  SeatingState state =
      state_from_forward(forward_generate(prior, cfg.n_obs, srng, &lik), prior, lik,
                         gibbs, srng);
  std::vector<std::vector<double>> succ(ns);
  long sweeps = 0;
  double min_ess = 0.0;
  bool aborted = false;
  std::string abort_reason;
  while (sweeps < cfg.max_sweeps && !aborted) {
    long done = 0;
    try {
      for (; done < cfg.chunk; ++done) {
        gibbs_sweep(state, prior, lik, gibbs, srng, sweeps + done + 1);
        for (auto& c : state.clusters)
          for (int i : c.members)
            state.data[i] = c.param + srng.normal01() * std::sqrt(lik.sigma1_sq);
        const auto st = geweke_stats(state);
        for (std::size_t j = 0; j < ns; ++j) succ[j].push_back(st[j]);
      }
    } catch (const std::exception& e) {
      // A numerically exploding chain (e.g. under fault injection) is a
      // failing outcome, not a harness crash.
      aborted = true;
      abort_reason = e.what();
    }
    sweeps += done;
    if (succ[0].size() < 100) {
      if (aborted) break;
      continue;
    }
    min_ess = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ns; ++j) {
      const auto rep = ess(succ[j], names[j]);
      min_ess = std::min(min_ess, rep.degenerate ? 1.0 : rep.ess);
    }
    if (!aborted && min_ess >= static_cast<double>(cfg.min_effective)) break;
  }
  if (succ[0].size() < 100)
    throw std::runtime_error("geweke_test: successive chain failed before collecting samples: " +
                             abort_reason);

  GewekeReport rep;
  rep.marginal_samples = cfg.marginal_samples;
  rep.sweeps = sweeps;
  rep.min_ess = min_ess;
  rep.aborted = aborted;
  rep.abort_reason = abort_reason;
  for (std::size_t j = 0; j < ns; ++j) {
    const auto mm = moments(marg[j]);
    const auto ms = moments(succ[j]);
    const auto er = ess(succ[j], names[j]);
    const double se2 =
        mm.var / static_cast<double>(marg[j].size()) + ms.var / std::max(er.ess, 1.0);
    GewekeStat gs;
    gs.name = names[j];
    gs.mean_marginal = mm.mean;
    gs.mean_successive = ms.mean;
    gs.ess_successive = er.ess;
    gs.z = se2 > 0.0 ? (mm.mean - ms.mean) / std::sqrt(se2) : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::fabs(gs.z));
    rep.stats.push_back(std::move(gs));
  }
  return rep;
}

std::string GewekeReport::to_string() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(4);
  os << "statistic      marginal me.  successive me.  ess(succ)      z\n";
  for (const auto& s : stats) {
    os << std::left << std::setw(14) << s.name << " " << std::setw(13)
       << s.mean_marginal << " " << std::setw(15) << s.mean_successive << " "
       << std::setw(13) << s.ess_successive << " " << std::setw(8) << s.z << "\n";
  }
  os << "sweeps: " << sweeps << "  marginal draws: " << marginal_samples
     << "  min ess: " << min_ess << "  max |z|: " << max_abs_z << "\n";
  if (aborted) os << "successive chain aborted: " << abort_reason << "\n";
  os << (pass() ? "PASS" : "FAIL") << " (threshold |z| < 4)\n";
  return os.str();
}

namespace {

// All set partitions of {0..n-1} as restricted-growth label vectors.
void enumerate_partitions(int n, std::vector<std::vector<int>>& out) {
  std::vector<int> labels(n, 0);
  const std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    for (int l = 0; l <= max_used + 1; ++l) {
      labels[i] = l;
      rec(i + 1, std::max(max_used, l));
    }
  };
  rec(0, -1);
}

}  // namespace

PriorCheckReport prior_check(double theta, double sigma, int n, long sweeps,
                             long forward_draws, RngStream& rng) {
  if (n < 2 || n > 6) throw std::invalid_argument("prior_check: n must be in [2, 6]");
  const PriorSpec prior = PriorSpec::pitman_yor(theta, sigma);
  const LikelihoodSpec lik(0.0, 1.0, 1.0);

  std::vector<std::vector<int>> parts;
  enumerate_partitions(n, parts);
  std::map<std::string, std::size_t> index;
  std::vector<double> oracle(parts.size());
  for (std::size_t p = 0; p < parts.size(); ++p) {
    index[canonical_partition(parts[p])] = p;
    std::map<int, int> sizes;
    for (int l : parts[p]) ++sizes[l];
    std::vector<int> bs;
    for (auto& [l, c] : sizes) bs.push_back(c);
    oracle[p] = py_eppf(bs, theta, sigma);
  }

  // Prior-only hybrid chain.
  GibbsConfig gibbs;
  gibbs.prior_only = true;
  gibbs.variant = SamplerVariant::slice_aux;
  RngStream crng = rng.spawn(11);
  SeatingState state = init_state(std::vector<double>(n, 0.0), prior, lik, gibbs, crng);
  std::vector<int> visits(static_cast<int>(sweeps));
  for (long s = 0; s < sweeps; ++s) {
    gibbs_sweep(state, prior, lik, gibbs, crng, s + 1);
    visits[s] = static_cast<int>(index.at(canonical_partition(state.seat)));
  }

  // Forward generator.
  RngStream frng = rng.spawn(12);
  std::vector<long> fwd_counts(parts.size(), 0);
  for (long s = 0; s < forward_draws; ++s) {
    const ForwardDraw fd = forward_generate(prior, n, frng);
    ++fwd_counts[index.at(canonical_partition(fd.labels))];
  }

  PriorCheckReport rep;
  rep.sweeps = sweeps;
  rep.forward_draws = forward_draws;
  rep.pass = true;
  std::vector<double> indicator(sweeps);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    long count = 0;
    for (long s = 0; s < sweeps; ++s) {
      indicator[s] = visits[s] == static_cast<int>(p) ? 1.0 : 0.0;
      count += visits[s] == static_cast<int>(p);
    }
    const auto er = ess(indicator, "partition");
    const double ess_eff = er.degenerate ? 1.0 : er.ess;
    PriorCheckRow row;
    row.partition = canonical_partition(parts[p]);
    row.oracle = oracle[p];
    row.chain_freq = static_cast<double>(count) / sweeps;
    row.chain_se = std::sqrt(oracle[p] * (1.0 - oracle[p]) / ess_eff);
    row.forward_freq = static_cast<double>(fwd_counts[p]) / forward_draws;
    row.forward_se = std::sqrt(oracle[p] * (1.0 - oracle[p]) / forward_draws);
    row.ok = std::fabs(row.chain_freq - row.oracle) <= 3.0 * row.chain_se &&
             std::fabs(row.forward_freq - row.oracle) <= 3.0 * row.forward_se;
    rep.pass = rep.pass && row.ok;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string PriorCheckReport::to_string() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(6);
  os << "partition      oracle    chain     (3se)     forward   (3se)     ok\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(14) << r.partition << " " << std::setw(9) << r.oracle
       << " " << std::setw(9) << r.chain_freq << " " << std::setw(9) << 3.0 * r.chain_se
       << " " << std::setw(9) << r.forward_freq << " " << std::setw(9)
       << 3.0 * r.forward_se << " " << (r.ok ? "yes" : "NO") << "\n";
  }
  os << "sweeps: " << sweeps << "  forward draws: " << forward_draws << "\n"
     << (pass ? "PASS" : "FAIL") << " (every partition within 3 MC se)\n";
  return os.str();
}

double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_sample.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() -
                              static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_p_value(double d, double n_eff) {
  const double lambda = (std::sqrt(n_eff) + 0.12 + 0.11 / std::sqrt(n_eff)) * d;
  double sum = 0.0;
  for (int j = 1; j <= 101; ++j) {
    const double term = 2.0 * (j % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::fabs(term) < 1e-10) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace pkmc
