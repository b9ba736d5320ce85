// Apache License, Version 2.0, refer to LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pkmc/diagnostics.hpp"
#include "pkmc/slice.hpp"

using namespace pkmc;

TEST_CASE("standard normal target moments") {
  RngStream rng(1);
  SliceConfig cfg;
  cfg.width = 1.0;
  double x = 0.0;
  const long n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n; ++i) {
    x = slice_sample([](double t) { return -0.5 * t * t; }, x, cfg, rng);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(var > 0.95);
  CHECK(var < 1.05);
}

TEST_CASE("flat target with hard bounds stays inside") {
  RngStream rng(2);
  SliceConfig cfg;
  cfg.width = 0.4;
  cfg.lower = 0.0;
  cfg.upper = 1.0;
  double x = 0.5;
  bool inside = true;
  for (long i = 0; i < 20000; ++i) {
    x = slice_sample([](double) { return 0.0; }, x, cfg, rng);
    inside = inside && x > 0.0 && x < 1.0;
  }
  CHECK(inside);
}

TEST_CASE("exponential target with lower bound") {
  RngStream rng(3);
  SliceConfig cfg;
  cfg.width = 1.0;
  cfg.lower = 0.0;
  double x = 1.0;
  const long n = 100000;
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    x = slice_sample([](double t) { return -t; }, x, cfg, rng);
    sum += x;
  }
  CHECK(std::fabs(sum / n - 1.0) < 0.02);
}

TEST_CASE("three-level step density occupancy") {
  // Piecewise-constant target on (0,3): weights 1, 3, 0.5 per unit cell.
  const auto logd = [](double t) -> double {
    if (t < 1.0) return 0.0;
    if (t < 2.0) return std::log(3.0);
    return std::log(0.5);
  };
  RngStream rng(4);
  SliceConfig cfg;
  cfg.width = 0.7;
  cfg.lower = 0.0;
  cfg.upper = 3.0;
  double x = 0.5;
  const long n = 200000;
  std::vector<double> in_cell(3, 0.0);
  std::vector<double> ind0(n);
  for (long i = 0; i < n; ++i) {
    x = slice_sample(logd, x, cfg, rng);
    const int cell = std::min(static_cast<int>(x), 2);
    ++in_cell[cell];
    ind0[i] = cell == 0 ? 1.0 : 0.0;
  }
  const double total = 4.5;
  const std::vector<double> expect = {1.0 / total, 3.0 / total, 0.5 / total};
  // Indicator-series ESS gives the MC standard error scale.
  const double e0 = ess(ind0).ess;
  for (int c = 0; c < 3; ++c) {
    const double se = std::sqrt(expect[c] * (1.0 - expect[c]) / e0);
    CHECK(std::fabs(in_cell[c] / n - expect[c]) < 3.0 * se);
  }
}

TEST_CASE("error paths") {
  RngStream rng(5);
  SliceConfig cfg;
  CHECK_THROWS_AS(
      slice_sample([](double) { return -std::numeric_limits<double>::infinity(); }, 0.0,
                   cfg, rng),
      std::invalid_argument);
  SliceConfig bad;
  bad.width = -1.0;
  CHECK_THROWS_AS(slice_sample([](double) { return 0.0; }, 0.0, bad, rng),
                  std::invalid_argument);
  SliceConfig bounds;
  bounds.lower = 0.0;
  bounds.upper = 1.0;
  CHECK_THROWS_AS(slice_sample([](double) { return 0.0; }, 2.0, bounds, rng),
                  std::invalid_argument);
  // A target that is -inf everywhere except the starting point collapses the
  // shrinkage interval.
  SliceConfig tight;
  tight.width = 1.0;
  const auto spike = [](double t) {
    return t == 0.25 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(slice_sample(spike, 0.25, tight, rng), std::runtime_error);
}
