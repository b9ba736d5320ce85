// Apache License, Version 2.0, refer to LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pkmc/runner.hpp"

using namespace pkmc;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pkmc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::vector<std::string> split_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text(
      "# comment\n"
      "prior.family = \"pitman-yor\"  # trailing\n"
      "prior.sigma = 0.5\n"
      "\n"
      "run.chains=2\n");
  CHECK(kv.at("prior.family") == "pitman-yor");
  CHECK(kv.at("prior.sigma") == "0.5");
  CHECK(kv.at("run.chains") == "2");
  CHECK_THROWS_AS(parse_config_text("not a key value"), std::invalid_argument);
}

TEST_CASE("run config defaults and validation") {
  const RunConfig cfg = make_run_config({});
  CHECK(cfg.iterations == 30000);
  CHECK(cfg.burnin == 10000);
  CHECK(cfg.chains == 10);
  CHECK(cfg.gibbs.pool_size == 3);
  CHECK(cfg.gibbs.variant == SamplerVariant::slice_aux);

  // Variant defaults track the prior family.
  const RunConfig lb = make_run_config({{"prior.family", "logbeta"}});
  CHECK(lb.gibbs.variant == SamplerVariant::direct_slice);

  // MH lambda defaults: 50 at sigma 0.5, 0 at sigma 0.3.
  const RunConfig mh5 = make_run_config({{"run.variant", "mh"}});
  CHECK(mh5.gibbs.mh_lambda == 50.0);
  const RunConfig mh3 = make_run_config({{"run.variant", "mh"}, {"prior.sigma", "0.3"}});
  CHECK(mh3.gibbs.mh_lambda == 0.0);

  CHECK_THROWS_WITH_AS(make_run_config({{"bogus.key", "1"}}),
                       doctest::Contains("bogus.key"), std::invalid_argument);
  CHECK_THROWS_AS(make_run_config({{"run.burnin", "50000"}}), std::invalid_argument);
  CHECK_THROWS_AS(make_run_config({{"prior.sigma", "abc"}}), std::invalid_argument);
  CHECK_THROWS_AS(make_run_config({{"prior.family", "dp"}}), std::invalid_argument);
}

TEST_CASE("dataset loading") {
  const auto dir = temp_dir("load");
  write_file(dir / "good.txt", "velocity\n100\n200\n# comment\n300\n");
  const auto values = load_dataset((dir / "good.txt").string(), 0.01);
  REQUIRE(values.size() == 3);
  CHECK(values[0] == doctest::Approx(1.0));
  CHECK(values[2] == doctest::Approx(3.0));

  write_file(dir / "bad.txt", "1\n2\n3\n4\nnope\n6\n");
  CHECK_THROWS_WITH_AS(load_dataset((dir / "bad.txt").string()),
                       doctest::Contains("line 5"), IoError);
  CHECK_THROWS_AS(load_dataset((dir / "missing.txt").string()), IoError);
  write_file(dir / "empty.txt", "# nothing\n");
  CHECK_THROWS_AS(load_dataset((dir / "empty.txt").string()), IoError);
}

TEST_CASE("galaxy file ships with 82 values") {
  const auto values = load_dataset("data/galaxies.txt", 1e-3);
  CHECK(values.size() == 82);
  CHECK(values.front() == doctest::Approx(9.172));
  CHECK(values.back() == doctest::Approx(34.279));
}

TEST_CASE("experiment run writes traces, summary and report deterministically") {
  const auto dir = temp_dir("run");
  write_file(dir / "data.txt", "1.1\n0.9\n1.0\n5.1\n4.9\n5.0\n");

  KeyValues kv = {{"prior.family", "pitman-yor"},
                  {"prior.theta", "10"},
                  {"prior.sigma", "0.5"},
                  {"run.iterations", "400"},
                  {"run.burnin", "100"},
                  {"run.chains", "2"},
                  {"run.seed", "11"},
                  {"data.path", (dir / "data.txt").string()},
                  {"data.scale", "1.0"}};

  RunConfig cfg = make_run_config(kv);
  cfg.out_dir = (dir / "out_a").string();
  const RunResult a = run_experiment(cfg);
  cfg.out_dir = (dir / "out_b").string();
  const RunResult b = run_experiment(cfg);

  REQUIRE(a.trace_paths.size() == 2);
  CHECK(fs::exists(a.summary_path));
  CHECK(fs::exists(a.report_path));

  for (int c = 0; c < 2; ++c) {
    const auto la = split_lines(a.trace_paths[c]);
    const auto lb = split_lines(b.trace_paths[c]);
    REQUIRE(la.size() == lb.size());
    REQUIRE(la.size() == 301u);  // header + kept rows
    CHECK(la[0] == "iter,K,V,T,logjoint,accept_mh,seconds");
    // Byte-identical apart from the wall-time column.
    for (std::size_t r = 0; r < la.size(); ++r) {
      const auto cut = [](const std::string& s) {
        return s.substr(0, s.rfind(','));
      };
      CHECK(cut(la[r]) == cut(lb[r]));
    }
  }

  // Summary matches the schema and the chain count.
  const auto sum_lines = split_lines(a.summary_path);
  REQUIRE(sum_lines.size() == 3u);
  CHECK(sum_lines[0] == "chain,kept,ess_K,ess_T,mean_K,accept_mh,seconds");

  // The trace round-trips through the CSV reader and the ESS report.
  const auto cols = read_trace_csv(a.trace_paths[0]);
  CHECK(cols.at("K").size() == 300u);
  const std::string ess_text = trace_ess_report(a.trace_paths[0]);
  CHECK(ess_text.find("K:") != std::string::npos);
  CHECK(ess_text.find("T:") != std::string::npos);

  // Missing data path surfaces as an IO error.
  cfg.data_path = (dir / "nope.txt").string();
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
}

TEST_CASE("empirical likelihood defaults come from the data") {
  const auto dir = temp_dir("emp");
  write_file(dir / "data.txt", "0\n2\n4\n");
  KeyValues kv = {{"run.iterations", "120"}, {"run.burnin", "20"},
                  {"run.chains", "1"},       {"data.path", (dir / "data.txt").string()},
                  {"data.scale", "1.0"},     {"out.dir", (dir / "out").string()}};
  const RunConfig cfg = make_run_config(kv);
  CHECK(!cfg.mu0_set);
  const RunResult r = run_experiment(cfg);  // runs with mean 2, var 4 defaults
  CHECK(r.chains.size() == 1u);
}
