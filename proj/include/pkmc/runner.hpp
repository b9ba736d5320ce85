// Apache License, Version 2.0, refer to LICENSE.txt
//
// Experiment harness: configuration, data ingestion, chain execution and
// trace/summary output. File formats are documented in the README.

#ifndef PKMC_RUNNER_HPP
#define PKMC_RUNNER_HPP

#include <map>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "pkmc/diagnostics.hpp"

namespace pkmc {

// File-system and parse failures; maps to exit code 2 at the CLI.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value map parsed from a TOML-style config file. Unknown keys
// are rejected when building a RunConfig.
using KeyValues = std::map<std::string, std::string>;

// True when the key is one the run configuration understands.
bool is_known_config_key(const std::string& key);

KeyValues parse_config_text(const std::string& text);
KeyValues parse_config_file(const std::string& path);

struct RunConfig {
  PriorSpec prior;
  std::optional<LikelihoodSpec> likelihood;  // empirical defaults when unset
  bool mu0_set = false, sigma0_set = false;

  long iterations = 30000;
  long burnin = 10000;
  int chains = 10;
  std::uint64_t seed = 1;
  GibbsConfig gibbs;
  bool mh_lambda_set = false;

  std::string data_path;
  double data_scale = 1e-3;
  std::string out_dir = "out";

  void validate() const;  // throws std::invalid_argument
};

// Builds a RunConfig from key-values, applying defaults and validating
// every key. Unknown keys or malformed values throw std::invalid_argument
// naming the key.
RunConfig make_run_config(const KeyValues& kv);

// One numeric value per line, optional single header line, '#' comments
// allowed. Values are multiplied by `scale`. Parse failures name the line.
std::vector<double> load_dataset(const std::string& path, double scale = 1.0);

struct ChainSummary {
  int chain = 0;
  long kept = 0;
  double ess_k = 0.0;
  double ess_t = 0.0;
  double mean_k = 0.0;
  double accept_rate = 1.0;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<ChainSummary> chains;
  std::vector<std::string> trace_paths;
  std::string summary_path;
  std::string report_path;
  std::vector<std::vector<double>> k_traces;  // post burn-in K per chain
};

// Runs config.chains independent chains and writes chain_<k>.csv,
// summary.csv and report.txt into out_dir (write-then-rename, so failures
// leave no partial files). Deterministic given (seed, chains) apart from the
// wall-time columns.
RunResult run_experiment(const RunConfig& config);

// Column-extraction helper for existing trace CSVs.
std::map<std::string, std::vector<double>> read_trace_csv(const std::string& path);

// ESS report text for the K and T columns of an existing trace CSV.
std::string trace_ess_report(const std::string& path);

}  // namespace pkmc

#endif
