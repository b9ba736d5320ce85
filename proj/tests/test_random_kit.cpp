// Apache License, Version 2.0, refer to LICENSE.txt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pkmc/diagnostics.hpp"
#include "pkmc/random_kit.hpp"

using namespace pkmc;

namespace {

struct MeanSd {
  double mean;
  double sd;
};

MeanSd mean_sd(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= x.size();
  double s2 = 0.0;
  for (double v : x) s2 += (v - m) * (v - m);
  return {m, std::sqrt(s2 / (x.size() - 1))};
}

template <class F>
double simpson(const F& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Tabulated CDF oracle built by Simpson integration of an unnormalized
// density over a strictly increasing grid.
struct CdfOracle {
  std::vector<double> s, cdf;

  template <class LogDensity>
  static CdfOracle build(const LogDensity& logd, const std::vector<double>& grid) {
    CdfOracle o;
    o.s = grid;
    o.cdf.assign(grid.size(), 0.0);
    const auto f = [&](double x) {
      const double l = logd(x);
      return l < -700.0 ? 0.0 : std::exp(l);
    };
    for (std::size_t i = 1; i < grid.size(); ++i)
      o.cdf[i] = o.cdf[i - 1] + simpson(f, grid[i - 1], grid[i], 16);
    const double total = o.cdf.back();
    for (auto& c : o.cdf) c /= total;
    return o;
  }

  double operator()(double x) const {
    if (x <= s.front()) return 0.0;
    if (x >= s.back()) return 1.0;
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const std::size_t i = it - s.begin();
    const double w = (x - s[i - 1]) / (s[i] - s[i - 1]);
    return cdf[i - 1] + w * (cdf[i] - cdf[i - 1]);
  }
};

std::vector<double> power_grid(double v, double power, int n) {
  std::vector<double> g(n + 1);
  for (int j = 0; j <= n; ++j) g[j] = v * std::pow(static_cast<double>(j) / n, power);
  g.front() = v * 1e-12;
  return g;
}

}  // namespace

TEST_CASE("stream determinism and spawning") {
  RngStream a(123), b(123);
  for (int i = 0; i < 32; ++i) CHECK(a.uniform01() == b.uniform01());
  RngStream c = RngStream(123).spawn(0), d = RngStream(123).spawn(1);
  bool differ = false;
  for (int i = 0; i < 8; ++i) differ = differ || (c.uniform01() != d.uniform01());
  CHECK(differ);
  RngStream e(7);
  const double s1 = sample_positive_stable(SigmaStableParams(0.5), e);
  RngStream f(7);
  CHECK(s1 == sample_positive_stable(SigmaStableParams(0.5), f));
}

TEST_CASE("gamma and inverse gamma moments") {
  RngStream rng(1);
  const long n = 1000000;
  std::vector<double> g34(n), g24(n), ig(n);
  for (long i = 0; i < n; ++i) {
    g34[i] = sample_gamma(0.75, 1.0, rng);
    g24[i] = sample_gamma(2.0, 4.0, rng);
    ig[i] = sample_inverse_gamma(3.0, 2.0, rng);
  }
  const auto m1 = mean_sd(g34);
  CHECK(std::fabs(m1.mean - 0.75) < 3.0 * m1.sd / std::sqrt(n));
  const auto m2 = mean_sd(g24);
  CHECK(std::fabs(m2.mean - 0.5) < 3.0 * m2.sd / std::sqrt(n));
  const auto m3 = mean_sd(ig);
  // InverseGamma(3, 2): mean = scale / (shape - 1) = 1.
  CHECK(std::fabs(m3.mean - 1.0) < 3.0 * m3.sd / std::sqrt(n));
  CHECK_THROWS_AS(sample_gamma(0.0, 1.0, rng), std::domain_error);
}

TEST_CASE("positive stable laplace transform and cdf") {
  const SigmaStableParams half(0.5);
  RngStream rng(2);
  const long n = 1000000;
  std::vector<double> lap(n);
  std::vector<double> draws;
  draws.reserve(100000);
  for (long i = 0; i < n; ++i) {
    const double t = sample_positive_stable(half, rng);
    lap[i] = std::exp(-t);
    if (i < 100000) draws.push_back(t);
  }
  const auto m = mean_sd(lap);
  CHECK(std::fabs(m.mean - std::exp(-1.0)) < 3.0 * m.sd / std::sqrt(n));

  // sigma = 1/2 law has closed-form CDF erfc(1/(2 sqrt(t))).
  std::sort(draws.begin(), draws.end());
  const double d =
      ks_statistic(draws, [](double t) { return std::erfc(1.0 / (2.0 * std::sqrt(t))); });
  CHECK(d < 0.005);
}

TEST_CASE("tilted stable mean identity") {
  const SigmaStableParams half(0.5);
  const long n = 1000000;
  // E[T] = sigma lambda^{sigma-1}.
  for (double lambda : {1.0, 4.0, 25.0}) {  // 25 exercises the double rejection
    RngStream rng(3);
    std::vector<double> x(n);
    for (long i = 0; i < n; ++i) x[i] = sample_tilted_stable(half, lambda, rng);
    const auto m = mean_sd(x);
    CHECK(std::fabs(m.mean - 0.5 * std::pow(lambda, -0.5)) < 3.0 * m.sd / std::sqrt(n));
  }
}

TEST_CASE("tilted stable: naive and double rejection agree at the switch point") {
  const SigmaStableParams half(0.5);
  const double lambda = 4.0;  // lambda^sigma = 2
  const long n = 100000;
  RngStream rng(5);
  std::vector<double> a(n), b(n);
  for (long i = 0; i < n; ++i)
    a[i] = sample_tilted_stable(half, lambda, rng, TiltedMethod::naive);
  for (long i = 0; i < n; ++i)
    b[i] = sample_tilted_stable(half, lambda, rng, TiltedMethod::double_rejection);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(ks_two_sample(a, b) < 0.01);
}

TEST_CASE("tilted stable: zero tilt is the plain stable law") {
  const SigmaStableParams p(0.4);
  RngStream a(6), b(6);
  for (int i = 0; i < 16; ++i)
    CHECK(sample_tilted_stable(p, 0.0, a) == sample_positive_stable(p, b));
  RngStream rng(6);
  CHECK_THROWS_AS(sample_tilted_stable(p, -1.0, rng), std::domain_error);
}

TEST_CASE("exact new-weight sampler vs inverse-cdf oracle") {
  const SigmaStableParams half(0.5);
  const double v = 1.0;
  // Oracle: density propto f_{1/2}(v-s) s^{-1/2} on (0, v), closed form inline.
  const auto logd = [&](double s) {
    const double r = v - s;
    if (s <= 0.0 || r <= 0.0) return -1e300;
    return -1.5 * std::log(r) - 1.0 / (4.0 * r) - 0.5 * std::log(s);
  };
  const auto oracle = CdfOracle::build(logd, power_grid(v, 2.0, 8192));

  RngStream rng(7);
  const long n = 100000;
  std::vector<double> draws(n);
  bool inside = true;
  for (long i = 0; i < n; ++i) {
    draws[i] = sample_new_weight_exact(v, half, rng);
    inside = inside && draws[i] > 0.0 && draws[i] < v;
  }
  CHECK(inside);
  std::sort(draws.begin(), draws.end());
  CHECK(ks_statistic(draws, [&](double x) { return oracle(x); }) < 0.01);
}

TEST_CASE("exact new-weight sampler at a second surplus value") {
  // The conditional is not scale-free in the surplus (the f_sigma(v-s)
  // factor carries v through its left tail), so each surplus gets its own
  // quadrature oracle.
  const SigmaStableParams half(0.5);
  const double v = 2.0;
  const auto logd = [&](double s) {
    const double r = v - s;
    if (s <= 0.0 || r <= 0.0) return -1e300;
    return -1.5 * std::log(r) - 1.0 / (4.0 * r) - 0.5 * std::log(s);
  };
  const auto oracle = CdfOracle::build(logd, power_grid(v, 2.0, 8192));
  RngStream rng(8);
  const long n = 100000;
  std::vector<double> draws(n);
  for (long i = 0; i < n; ++i) draws[i] = sample_new_weight_exact(v, half, rng);
  std::sort(draws.begin(), draws.end());
  CHECK(ks_statistic(draws, [&](double x) { return oracle(x); }) < 0.01);
  CHECK_THROWS_AS(sample_new_weight_exact(1.0, SigmaStableParams(0.3), rng),
                  std::domain_error);
}

TEST_CASE("generic new-weight sampler agrees with the exact one") {
  const PriorSpec prior = PriorSpec::normalized_stable(0.5);
  const long n = 100000;
  RngStream r1(10), r2(11);
  std::vector<double> gen(n), exact(n);
  bool inside = true;
  for (long i = 0; i < n; ++i) {
    gen[i] = sample_new_weight_generic(1.0, prior, r1);
    inside = inside && gen[i] > 0.0 && gen[i] < 1.0;
    exact[i] = sample_new_weight_exact(1.0, prior.stable_params, r2);
  }
  CHECK(inside);
  std::sort(gen.begin(), gen.end());
  std::sort(exact.begin(), exact.end());
  CHECK(ks_two_sample(gen, exact) < 0.015);
}

TEST_CASE("generic new-weight sampler: -logBeta(1,1) collapses to uniform") {
  const PriorSpec prior = PriorSpec::log_beta(1.0, 1.0);
  RngStream rng(12);
  const long n = 100000;
  std::vector<double> x(n);
  for (long i = 0; i < n; ++i) x[i] = sample_new_weight_generic(2.0, prior, rng);
  std::sort(x.begin(), x.end());
  CHECK(ks_statistic(x, [](double s) { return std::clamp(s / 2.0, 0.0, 1.0); }) < 0.01);
}

TEST_CASE("-logBeta new-weight rejection sampler") {
  RngStream rng(13);
  const long n = 100000;

  // b = 1: acceptance is identically one, output uniform on (0, v).
  {
    const LogBetaParams p(1.0, 1.0);
    RejectionStats stats;
    std::vector<double> x(n);
    for (long i = 0; i < n; ++i) x[i] = sample_new_weight_logbeta(3.0, p, rng, &stats);
    CHECK(stats.accepted == stats.proposals);
    std::sort(x.begin(), x.end());
    CHECK(ks_statistic(x, [](double s) { return std::clamp(s / 3.0, 0.0, 1.0); }) < 0.01);
  }

  // a=1, b=2, v=1: 50-bin histogram against the quadrature-normalized target.
  {
    const LogBetaParams p(1.0, 2.0);
    const double v = 1.0;
    const auto target = [&](double s) {
      return (1.0 - std::exp(s - v)) * (1.0 - std::exp(-2.0 * s)) / (1.0 - std::exp(-s));
    };
    const double total = simpson(target, 1e-9, v - 1e-9, 20000);
    std::vector<double> bins(50, 0.0);
    bool inside = true;
    for (long i = 0; i < n; ++i) {
      const double s = sample_new_weight_logbeta(v, p, rng);
      inside = inside && s > 0.0 && s < v;
      ++bins[std::min<std::size_t>(static_cast<std::size_t>(s / v * 50.0), 49)];
    }
    CHECK(inside);
    double sup = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double a = v * k / 50.0, b = v * (k + 1) / 50.0;
      const double pk =
          simpson(target, std::max(a, 1e-9), std::min(b, v - 1e-9), 512) / total;
      sup = std::max(sup, std::fabs(bins[k] / n - pk));
    }
    CHECK(sup < 0.02);
  }

  // Envelope check: target(s) <= b on a grid, b=2, v=3.
  {
    const double v = 3.0, b = 2.0;
    double worst = 0.0;
    for (int i = 1; i < 1000; ++i) {
      const double s = v * i / 1000.0;
      const double t = std::pow(1.0 - std::exp(s - v), b - 1.0) *
                       (1.0 - std::exp(-b * s)) / (1.0 - std::exp(-s));
      worst = std::max(worst, t);
    }
    CHECK(worst <= b + 1e-12);
  }
}

TEST_CASE("kanter auxiliary sampler matches quadrature moments") {
  for (auto [sigma, v] : {std::pair{0.5, 1.0}, {0.3, 2.5}}) {
    const SigmaStableParams p(sigma);
    const double c = std::pow(v, -sigma / (1.0 - sigma));
    const auto w = [&](double z) {
      return zolotarev_A(z, p) * std::exp(-c * zolotarev_A(z, p));
    };
    const auto wa = [&](double z) { return w(z) * zolotarev_A(z, p); };
    const double expect =
        simpson(wa, 1e-9, 1.0 - 1e-9, 20000) / simpson(w, 1e-9, 1.0 - 1e-9, 20000);

    RngStream rng(14);
    const long n = 100000;
    std::vector<double> a(n);
    for (long i = 0; i < n; ++i) a[i] = zolotarev_A(sample_kanter_z(v, p, rng), p);
    const auto m = mean_sd(a);
    CHECK(std::fabs(m.mean - expect) < 3.0 * m.sd / std::sqrt(n));
  }
}
