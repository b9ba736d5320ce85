// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace pkmc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
    return v.substr(1, v.size() - 2);
  return v;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "prior.family", "prior.sigma", "prior.theta", "prior.tau", "prior.a", "prior.b",
      "likelihood.mu0", "likelihood.sigma0_sq", "likelihood.sigma1_sq",
      "run.iterations", "run.burnin", "run.chains", "run.seed", "run.pool_size",
      "run.variant", "run.mh_lambda", "run.scan_order", "run.pool_refresh",
      "run.param_update", "run.weight_bound", "run.fault", "run.slice_width",
      "run.z_width", "run.slice_max_steps",
      "data.path", "data.scale", "out.dir"};
  return keys;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace

bool is_known_config_key(const std::string& key) { return known_keys().count(key) > 0; }

KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = unquote(trim(body.substr(eq + 1)));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void RunConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("run.iterations must be >= 1");
  if (burnin < 0 || burnin >= iterations)
    throw std::invalid_argument("run.burnin must satisfy 0 <= burnin < iterations");
  if (chains < 1) throw std::invalid_argument("run.chains must be >= 1");
  gibbs.validate(prior);
}

RunConfig make_run_config(const KeyValues& kv) {
  for (const auto& [key, value] : kv)
    if (!is_known_config_key(key))
      throw std::invalid_argument("unknown config key '" + key + "'");

  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  std::string family = "pitman-yor";
  if (const auto* v = get("prior.family")) family = *v;
  double sigma = 0.5, theta = 10.0, tau = 1.0, a = 1.0, b = 2.0;
  if (const auto* v = get("prior.sigma")) sigma = parse_double("prior.sigma", *v);
  if (const auto* v = get("prior.theta")) theta = parse_double("prior.theta", *v);
  if (const auto* v = get("prior.tau")) tau = parse_double("prior.tau", *v);
  if (const auto* v = get("prior.a")) a = parse_double("prior.a", *v);
  if (const auto* v = get("prior.b")) b = parse_double("prior.b", *v);

  RunConfig cfg;
  if (family == "pitman-yor")
    cfg.prior = PriorSpec::pitman_yor(theta, sigma);
  else if (family == "normalized-stable")
    cfg.prior = PriorSpec::normalized_stable(sigma);
  else if (family == "ngg")
    cfg.prior = PriorSpec::ngg(tau, sigma);
  else if (family == "logbeta" || family == "-logbeta")
    cfg.prior = PriorSpec::log_beta(a, b);
  else
    throw std::invalid_argument("prior.family must be one of pitman-yor, "
                                "normalized-stable, ngg, logbeta");

  double mu0 = 0.0, s0 = 1.0, s1 = 0.5;
  if (const auto* v = get("likelihood.mu0")) {
    mu0 = parse_double("likelihood.mu0", *v);
    cfg.mu0_set = true;
  }
  if (const auto* v = get("likelihood.sigma0_sq")) {
    s0 = parse_double("likelihood.sigma0_sq", *v);
    cfg.sigma0_set = true;
  }
  if (const auto* v = get("likelihood.sigma1_sq")) s1 = parse_double("likelihood.sigma1_sq", *v);
  cfg.likelihood = LikelihoodSpec(mu0, s0, s1);

  if (const auto* v = get("run.iterations")) cfg.iterations = parse_long("run.iterations", *v);
  if (const auto* v = get("run.burnin")) cfg.burnin = parse_long("run.burnin", *v);
  if (const auto* v = get("run.chains")) cfg.chains = static_cast<int>(parse_long("run.chains", *v));
  if (const auto* v = get("run.seed")) cfg.seed = static_cast<std::uint64_t>(parse_long("run.seed", *v));
  if (const auto* v = get("run.pool_size"))
    cfg.gibbs.pool_size = static_cast<int>(parse_long("run.pool_size", *v));

  if (const auto* v = get("run.variant")) {
    if (*v == "slice-aux")
      cfg.gibbs.variant = SamplerVariant::slice_aux;
    else if (*v == "mh")
      cfg.gibbs.variant = SamplerVariant::mh_stable;
    else if (*v == "direct-slice")
      cfg.gibbs.variant = SamplerVariant::direct_slice;
    else
      throw std::invalid_argument("run.variant must be slice-aux, mh or direct-slice");
  } else {
    cfg.gibbs.variant = cfg.prior.is_stable() ? SamplerVariant::slice_aux
                                              : SamplerVariant::direct_slice;
  }

  if (const auto* v = get("run.mh_lambda")) {
    cfg.gibbs.mh_lambda = parse_double("run.mh_lambda", *v);
    cfg.mh_lambda_set = true;
  } else if (cfg.gibbs.variant == SamplerVariant::mh_stable) {
    cfg.gibbs.mh_lambda = cfg.prior.sigma() >= 0.5 ? 50.0 : 0.0;
  }

  if (const auto* v = get("run.scan_order")) {
    if (*v == "fixed")
      cfg.gibbs.scan_order = ScanOrder::fixed;
    else if (*v == "random")
      cfg.gibbs.scan_order = ScanOrder::random_permutation;
    else
      throw std::invalid_argument("run.scan_order must be fixed or random");
  }
  if (const auto* v = get("run.pool_refresh")) {
    if (*v == "per_obs")
      cfg.gibbs.pool_refresh = PoolRefresh::per_obs;
    else if (*v == "per_slot")
      cfg.gibbs.pool_refresh = PoolRefresh::per_slot;
    else
      throw std::invalid_argument("run.pool_refresh must be per_obs or per_slot");
  }
  if (const auto* v = get("run.param_update")) {
    if (*v == "conjugate")
      cfg.gibbs.param_update = ParamUpdate::conjugate;
    else if (*v == "slice")
      cfg.gibbs.param_update = ParamUpdate::slice;
    else
      throw std::invalid_argument("run.param_update must be conjugate or slice");
  }
  if (const auto* v = get("run.weight_bound")) {
    if (*v == "unbounded")
      cfg.gibbs.weight_bound = WeightBoundPolicy::unbounded;
    else if (*v == "surpmass")
      cfg.gibbs.weight_bound = WeightBoundPolicy::surpmass;
    else
      throw std::invalid_argument("run.weight_bound must be unbounded or surpmass");
  }
  if (const auto* v = get("run.fault")) {
    if (*v == "none")
      cfg.gibbs.fault = FaultInjection::none;
    else if (*v == "double-weights")
      cfg.gibbs.fault = FaultInjection::double_weights;
    else
      throw std::invalid_argument("run.fault must be none or double-weights");
  }

  if (const auto* v = get("run.slice_width")) {
    cfg.gibbs.log_slice_width = parse_double("run.slice_width", *v);
    if (!(cfg.gibbs.log_slice_width > 0.0))
      throw std::invalid_argument("run.slice_width must be positive");
  }
  if (const auto* v = get("run.z_width")) {
    cfg.gibbs.z_slice_width = parse_double("run.z_width", *v);
    if (!(cfg.gibbs.z_slice_width > 0.0 && cfg.gibbs.z_slice_width <= 1.0))
      throw std::invalid_argument("run.z_width must lie in (0, 1]");
  }
  if (const auto* v = get("run.slice_max_steps")) {
    cfg.gibbs.slice_max_steps = static_cast<int>(parse_long("run.slice_max_steps", *v));
    if (cfg.gibbs.slice_max_steps < 1)
      throw std::invalid_argument("run.slice_max_steps must be >= 1");
  }
  if (const auto* v = get("data.path")) cfg.data_path = *v;
  if (const auto* v = get("data.scale")) cfg.data_scale = parse_double("data.scale", *v);
  if (const auto* v = get("out.dir")) cfg.out_dir = *v;

  cfg.validate();
  return cfg;
}

std::vector<double> load_dataset(const std::string& path, double scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file: " + path);
  std::vector<double> values;
  std::string line;
  long lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    try {
      std::size_t pos = 0;
      const double x = std::stod(body, &pos);
      if (pos != body.size()) throw std::invalid_argument("");
      values.push_back(x * scale);
      header_allowed = false;
    } catch (const std::exception&) {
      if (header_allowed) {
        header_allowed = false;  // one non-numeric header line is fine
        continue;
      }
      throw IoError("data file " + path + ": malformed value at line " +
                    std::to_string(lineno));
    }
  }
  if (values.empty()) throw IoError("data file " + path + ": no values");
  return values;
}

namespace {

struct ChainOutput {
  ChainSummary summary;
  std::string csv;
  std::vector<double> k_trace;
};

ChainOutput run_one_chain(const RunConfig& cfg, const LikelihoodSpec& lik,
                          const std::vector<double>& data, int chain) {
  const auto wall0 = std::chrono::steady_clock::now();
  RngStream rng = RngStream(cfg.seed).spawn(static_cast<std::uint64_t>(chain));
  SeatingState state = init_state(data, cfg.prior, lik, cfg.gibbs, rng);

  ChainOutput out;
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "iter,K,V,T,logjoint,accept_mh,seconds\n";

  MhCounters mh;
  std::vector<double> t_trace;
  double mean_k = 0.0;
  const long kept = cfg.iterations - cfg.burnin;
  out.k_trace.reserve(kept);
  t_trace.reserve(kept);
  for (long it = 1; it <= cfg.iterations; ++it) {
    const TraceRecord rec = gibbs_sweep(state, cfg.prior, lik, cfg.gibbs, rng, it, &mh);
    if (it <= cfg.burnin) continue;
    out.k_trace.push_back(rec.k);
    t_trace.push_back(rec.total);
    mean_k += rec.k;
    csv << rec.iteration << ',' << rec.k << ',' << format_double(rec.surplus) << ','
        << format_double(rec.total) << ',' << format_double(rec.log_joint) << ','
        << rec.mh_accepted << ',' << format_double(rec.seconds) << '\n';
  }
  out.csv = csv.str();

  out.summary.chain = chain;
  out.summary.kept = kept;
  out.summary.mean_k = mean_k / static_cast<double>(kept);
  out.summary.ess_k = ess(out.k_trace, "K").ess;
  out.summary.ess_t = ess(t_trace, "T").ess;
  out.summary.accept_rate = cfg.gibbs.variant == SamplerVariant::mh_stable ? mh.rate() : 1.0;
  out.summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
  config.validate();
  if (config.data_path.empty())
    throw std::invalid_argument("data.path is required for a run");
  const std::vector<double> data = load_dataset(config.data_path, config.data_scale);

  LikelihoodSpec lik = config.likelihood.value_or(LikelihoodSpec(0.0, 1.0, 0.5));
  if (!config.mu0_set || !config.sigma0_set) {
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (double x : data) var += (x - mean) * (x - mean);
    var /= std::max<std::size_t>(data.size() - 1, 1);
    lik = LikelihoodSpec(config.mu0_set ? lik.mu0 : mean,
                         config.sigma0_set ? lik.sigma0_sq : var, lik.sigma1_sq);
  }

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + config.out_dir);

  std::vector<ChainOutput> outputs(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(config.chains)));
  std::vector<std::thread> pool;
  std::mutex next_mutex;
  int next_chain = 0;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int c;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next_chain >= config.chains) return;
          c = next_chain++;
        }
        try {
          outputs[c] = run_one_chain(config, lik, data, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult result;
  for (int c = 0; c < config.chains; ++c) {
    const fs::path path = fs::path(config.out_dir) / ("chain_" + std::to_string(c) + ".csv");
    write_atomic(path, outputs[c].csv);
    result.trace_paths.push_back(path.string());
    result.chains.push_back(outputs[c].summary);
    result.k_traces.push_back(std::move(outputs[c].k_trace));
  }

  std::ostringstream sum;
  sum.imbue(std::locale::classic());
  sum << "chain,kept,ess_K,ess_T,mean_K,accept_mh,seconds\n";
  for (const auto& s : result.chains)
    sum << s.chain << ',' << s.kept << ',' << format_double(s.ess_k) << ','
        << format_double(s.ess_t) << ',' << format_double(s.mean_k) << ','
        << format_double(s.accept_rate) << ',' << format_double(s.seconds) << '\n';
  const fs::path sum_path = fs::path(config.out_dir) / "summary.csv";
  write_atomic(sum_path, sum.str());
  result.summary_path = sum_path.string();

  const auto agg = [&](auto f) {
    double m = 0.0;
    for (const auto& s : result.chains) m += f(s);
    m /= result.chains.size();
    double v = 0.0;
    for (const auto& s : result.chains) v += (f(s) - m) * (f(s) - m);
    v = result.chains.size() > 1 ? v / (result.chains.size() - 1) : 0.0;
    return std::make_pair(m, std::sqrt(v));
  };
  const auto [esk_m, esk_s] = agg([](const ChainSummary& s) { return s.ess_k; });
  const auto [est_m, est_s] = agg([](const ChainSummary& s) { return s.ess_t; });
  const auto [sec_m, sec_s] = agg([](const ChainSummary& s) { return s.seconds; });
  const auto [k_m, k_s] = agg([](const ChainSummary& s) { return s.mean_k; });
  const auto [ac_m, ac_s] = agg([](const ChainSummary& s) { return s.accept_rate; });

  std::ostringstream rep;
  rep.imbue(std::locale::classic());
  rep << std::fixed << std::setprecision(3);
  rep << "prior: " << config.prior.describe() << "\n"
      << "variant: "
      << (config.gibbs.variant == SamplerVariant::slice_aux      ? "slice-aux"
          : config.gibbs.variant == SamplerVariant::mh_stable    ? "mh"
                                                                 : "direct-slice");
  if (config.gibbs.variant == SamplerVariant::mh_stable)
    rep << " (lambda=" << config.gibbs.mh_lambda << ")";
  rep << "\n"
      << "chains: " << config.chains << "  iterations: " << config.iterations
      << "  burn-in: " << config.burnin << "  M: " << config.gibbs.pool_size
      << "  seed: " << config.seed << "\n"
      << "n: " << data.size() << "  likelihood: mu0=" << lik.mu0
      << " sigma0_sq=" << lik.sigma0_sq << " sigma1_sq=" << lik.sigma1_sq << "\n\n"
      << "running time (s): " << sec_m << " (" << sec_s << ")\n"
      << "ESS of K:         " << esk_m << " (" << esk_s << ")\n"
      << "ESS of T:         " << est_m << " (" << est_s << ")\n"
      << "mean K:           " << k_m << " (" << k_s << ")\n"
      << "MH acceptance:    " << ac_m << " (" << ac_s << ")\n";
  const fs::path rep_path = fs::path(config.out_dir) / "report.txt";
  write_atomic(rep_path, rep.str());
  result.report_path = rep_path.string();
  return result;
}

std::map<std::string, std::vector<double>> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trace file: " + path);
  std::vector<std::string> names;
  {
    std::istringstream hs(trim(line));
    std::string col;
    while (std::getline(hs, col, ',')) names.push_back(trim(col));
  }
  std::map<std::string, std::vector<double>> cols;
  for (const auto& nm : names) cols[nm] = {};
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty()) continue;
    std::istringstream ls(body);
    std::string cell;
    std::size_t idx = 0;
    while (std::getline(ls, cell, ',')) {
      if (idx >= names.size())
        throw IoError(path + ": too many columns at line " + std::to_string(lineno));
      try {
        cols[names[idx]].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": malformed value at line " + std::to_string(lineno));
      }
      ++idx;
    }
    if (idx != names.size())
      throw IoError(path + ": missing columns at line " + std::to_string(lineno));
  }
  return cols;
}

std::string trace_ess_report(const std::string& path) {
  const auto cols = read_trace_csv(path);
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(1);
  for (const char* name : {"K", "T"}) {
    const auto it = cols.find(name);
    if (it == cols.end()) throw IoError(path + ": missing column " + name);
    if (static_cast<long>(it->second.size()) < 100)
      throw std::invalid_argument("trace too short for ESS (need >= 100 rows)");
    const auto rep = ess(it->second, name);
    os << name << ": n=" << rep.n << " ess=" << rep.ess
       << " cutoff_lag=" << rep.cutoff_lag << (rep.degenerate ? " (degenerate)" : "")
       << "\n";
  }
  return os.str();
}

}  // namespace pkmc
