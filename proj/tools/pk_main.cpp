// Apache License, Version 2.0, refer to LICENSE.txt
//
// pk: Poisson-Kingman hybrid sampler CLI. Talks to the library exclusively
// through the C API in pkmc.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pkmc.h"

namespace {

struct ConfigHandle {
  pkmc_config* cfg = pkmc_config_create();
  ~ConfigHandle() { pkmc_config_free(cfg); }
};

int fail(pkmc_status st) {
  std::fprintf(stderr, "error: %s\n", pkmc_last_error());
  return static_cast<int>(st);
}

int apply_sets(pkmc_config* cfg, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", s.c_str());
      return 1;
    }
    const std::string key = s.substr(0, eq), value = s.substr(eq + 1);
    if (const auto st = pkmc_config_set(cfg, key.c_str(), value.c_str()); st != PKMC_OK)
      return fail(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid MCMC for Poisson-Kingman mixture models"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> sets;
  long seed = -1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    sub->add_option("--config", config_path, "TOML config file")
        ->required(config_required);
    sub->add_option("--set", sets, "override config key, e.g. --set run.chains=2");
    sub->add_option("--seed", seed, "override run.seed");
  };

  auto* run = app.add_subcommand("run", "run chains and write traces/summary");
  add_common(run, true);
  run->add_option("--out", out_dir, "override output directory");

  auto* prior = app.add_subcommand("prior-check", "EPPF reproduction suite (Pitman-Yor)");
  add_common(prior, false);
  int pc_n = 3;
  long pc_sweeps = 200000, pc_forward = 200000;
  double pc_theta = 10.0, pc_sigma = 0.5;
  prior->add_option("--n", pc_n, "observations per partition test");
  prior->add_option("--sweeps", pc_sweeps, "prior-only chain length");
  prior->add_option("--forward", pc_forward, "forward-generator draws");
  prior->add_option("--theta", pc_theta, "Pitman-Yor theta");
  prior->add_option("--sigma", pc_sigma, "Pitman-Yor sigma");

  auto* geweke = app.add_subcommand("geweke", "joint-distribution correctness test");
  add_common(geweke, false);
  int gw_n = 8;
  long gw_ess = 10000;
  bool gw_fault = false;
  geweke->add_option("--n-obs", gw_n, "synthetic observations");
  geweke->add_option("--min-ess", gw_ess, "target effective samples");
  geweke->add_flag("--fault", gw_fault, "inject a broken weight update (sensitivity check)");

  auto* ess_cmd = app.add_subcommand("ess", "recompute ESS from a trace CSV");
  std::string trace_path;
  ess_cmd->add_option("trace", trace_path, "chain_<k>.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  ConfigHandle handle;
  if (!handle.cfg) {
    std::fprintf(stderr, "error: out of memory\n");
    return 3;
  }
  if (!config_path.empty())
    if (const auto st = pkmc_config_load_file(handle.cfg, config_path.c_str()); st != PKMC_OK)
      return fail(st);
  if (const int rc = apply_sets(handle.cfg, sets); rc != 0) return rc;
  if (seed >= 0)
    if (const auto st = pkmc_config_set(handle.cfg, "run.seed",
                                        std::to_string(seed).c_str());
        st != PKMC_OK)
      return fail(st);

  if (run->parsed()) {
    const auto st = pkmc_run(handle.cfg, out_dir.empty() ? nullptr : out_dir.c_str());
    if (st != PKMC_OK) return fail(st);
    std::printf("run complete; outputs in %s\n",
                out_dir.empty() ? "the configured out.dir" : out_dir.c_str());
    return 0;
  }

  if (prior->parsed()) {
    pkmc_config_set(handle.cfg, "prior.family", "pitman-yor");
    pkmc_config_set(handle.cfg, "prior.theta", std::to_string(pc_theta).c_str());
    pkmc_config_set(handle.cfg, "prior.sigma", std::to_string(pc_sigma).c_str());
    char* report = nullptr;
    int pass = 0;
    const auto st =
        pkmc_prior_check(handle.cfg, pc_n, pc_sweeps, pc_forward, &report, &pass);
    if (st != PKMC_OK) return fail(st);
    std::printf("%s", report);
    pkmc_string_free(report);
    return pass ? 0 : 4;
  }

  if (geweke->parsed()) {
    if (gw_fault)
      if (const auto st = pkmc_config_set(handle.cfg, "run.fault", "double-weights");
          st != PKMC_OK)
        return fail(st);
    char* report = nullptr;
    int pass = 0;
    const auto st = pkmc_geweke(handle.cfg, gw_n, gw_ess, &report, &pass);
    if (st != PKMC_OK) return fail(st);
    std::printf("%s", report);
    pkmc_string_free(report);
    return pass ? 0 : 4;
  }

  if (ess_cmd->parsed()) {
    char* report = nullptr;
    const auto st = pkmc_trace_ess(trace_path.c_str(), &report);
    if (st != PKMC_OK) return fail(st);
    std::printf("%s", report);
    pkmc_string_free(report);
    return 0;
  }

  return 0;
}
