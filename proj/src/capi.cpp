// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "pkmc/runner.hpp"

struct pkmc_config {
  pkmc::KeyValues kv;
};

namespace {

thread_local std::string t_error = "no error";

void set_error(const std::string& msg) { t_error = msg; }

template <class Fn>
pkmc_status guarded(Fn&& fn) {
  try {
    fn();
    return PKMC_OK;
  } catch (const pkmc::IoError& e) {
    set_error(e.what());
    return PKMC_ERR_IO;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return PKMC_ERR_CONFIG;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return PKMC_ERR_CONFIG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PKMC_ERR_NUMERIC;
  } catch (...) {
    set_error("unknown failure");
    return PKMC_ERR_NUMERIC;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

pkmc::LikelihoodSpec geweke_likelihood(const pkmc::RunConfig& cfg) {
  // Synthetic-data harness: fall back to a unit-scale likelihood when the
  // config does not pin the hyperparameters.
  const auto lik = cfg.likelihood.value_or(pkmc::LikelihoodSpec(0.0, 1.0, 1.0));
  return pkmc::LikelihoodSpec(cfg.mu0_set ? lik.mu0 : 0.0,
                              cfg.sigma0_set ? lik.sigma0_sq : 1.0, lik.sigma1_sq);
}

}  // namespace

extern "C" {

const char* pkmc_version(void) { return "0.1.0"; }

const char* pkmc_last_error(void) { return t_error.c_str(); }

pkmc_config* pkmc_config_create(void) { return new (std::nothrow) pkmc_config(); }

void pkmc_config_free(pkmc_config* cfg) { delete cfg; }

pkmc_status pkmc_config_set(pkmc_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg || !key || !value) throw std::invalid_argument("null argument");
    if (!pkmc::is_known_config_key(key))
      throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
    cfg->kv[key] = value;
  });
}

pkmc_status pkmc_config_load_file(pkmc_config* cfg, const char* path) {
  return guarded([&] {
    if (!cfg || !path) throw std::invalid_argument("null argument");
    for (auto& [k, v] : pkmc::parse_config_file(path)) {
      if (!pkmc::is_known_config_key(k))
        throw std::invalid_argument("unknown config key '" + k + "'");
      cfg->kv[k] = v;
    }
  });
}

pkmc_status pkmc_run(const pkmc_config* cfg, const char* out_dir) {
  return guarded([&] {
    if (!cfg) throw std::invalid_argument("null config");
    pkmc::RunConfig rc = pkmc::make_run_config(cfg->kv);
    if (out_dir) rc.out_dir = out_dir;
    pkmc::run_experiment(rc);
  });
}

pkmc_status pkmc_prior_check(const pkmc_config* cfg, int n, long sweeps,
                             long forward_draws, char** report_out, int* pass_out) {
  return guarded([&] {
    if (!cfg || !report_out || !pass_out) throw std::invalid_argument("null argument");
    const pkmc::RunConfig rc = pkmc::make_run_config(cfg->kv);
    if (!rc.prior.is_stable() ||
        rc.prior.tilt.kind != pkmc::TiltFunction::Kind::pitman_yor)
      throw std::invalid_argument("prior-check requires a Pitman-Yor prior");
    pkmc::RngStream rng(rc.seed);
    const auto rep = pkmc::prior_check(rc.prior.tilt.theta, rc.prior.sigma(), n, sweeps,
                                       forward_draws, rng);
    *report_out = dup_string(rep.to_string());
    *pass_out = rep.pass ? 1 : 0;
  });
}

pkmc_status pkmc_geweke(const pkmc_config* cfg, int n_obs, long min_effective,
                        char** report_out, int* pass_out) {
  return guarded([&] {
    if (!cfg || !report_out || !pass_out) throw std::invalid_argument("null argument");
    const pkmc::RunConfig rc = pkmc::make_run_config(cfg->kv);
    pkmc::GewekeConfig gc;
    gc.n_obs = n_obs;
    if (min_effective > 0) gc.min_effective = min_effective;
    gc.gibbs = rc.gibbs;
    pkmc::RngStream rng(rc.seed);
    const auto rep = pkmc::geweke_test(rc.prior, geweke_likelihood(rc), gc, rng);
    *report_out = dup_string(rep.to_string());
    *pass_out = rep.pass() ? 1 : 0;
  });
}

pkmc_status pkmc_ess(const double* series, long n, double* ess_out,
                     long* cutoff_lag_out, int* degenerate_out) {
  return guarded([&] {
    if (!series || !ess_out) throw std::invalid_argument("null argument");
    const auto rep = pkmc::ess(std::span<const double>(series, static_cast<std::size_t>(n)));
    *ess_out = rep.ess;
    if (cutoff_lag_out) *cutoff_lag_out = rep.cutoff_lag;
    if (degenerate_out) *degenerate_out = rep.degenerate ? 1 : 0;
  });
}

pkmc_status pkmc_trace_ess(const char* trace_csv_path, char** report_out) {
  return guarded([&] {
    if (!trace_csv_path || !report_out) throw std::invalid_argument("null argument");
    *report_out = dup_string(pkmc::trace_ess_report(trace_csv_path));
  });
}

void pkmc_string_free(char* s) { std::free(s); }

}  // extern "C"
