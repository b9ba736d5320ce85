// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/random_kit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pkmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kMaxRejectIter = 1000000;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double log_sinc(double x) {
  // log(sin(x)/x) on [0, pi).
  if (x < 1e-8) return -x * x / 6.0;
  return std::log(std::sin(x)) - std::log(x);
}

// Zolotarev's function of u in (0, pi), a = A(u/pi) in the z coordinate.
double zolotarev_a_u(double u, double alpha) {
  return std::exp((alpha * std::log(std::sin(alpha * u)) +
                   (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) -
                   std::log(std::sin(u))) /
                  (1.0 - alpha));
}

// B(u) = sinc(u) / (sinc(alpha u)^alpha sinc((1-alpha)u)^{1-alpha}).
double log_ratio_B(double u, double alpha) {
  return log_sinc(u) - alpha * log_sinc(alpha * u) -
         (1.0 - alpha) * log_sinc((1.0 - alpha) * u);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  engine_.seed(splitmix64(s));
}

RngStream RngStream::spawn(std::uint64_t index) const {
  std::uint64_t s = seed_ ^ (0xD1B54A32D192ED03ULL * (index + 1));
  return RngStream(splitmix64(s));
}

std::uint64_t RngStream::bits() { return engine_(); }

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = bits();
  } while (r >= limit);
  return r % n;
}

double RngStream::uniform01() {
  return (static_cast<double>(bits() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform01(); }

double RngStream::normal01() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double RngStream::exponential() { return -std::log(uniform01()); }

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("sample_gamma: parameters must be positive");
  if (shape < 1.0) {
    // Boost the shape, then scale back with a uniform power.
    const double u = rng.uniform01();
    return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal01();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  return 1.0 / sample_gamma(shape, scale, rng);
}

double sample_beta(double a, double b, RngStream& rng) {
  const double g1 = sample_gamma(a, 1.0, rng);
  const double g2 = sample_gamma(b, 1.0, rng);
  return g1 / (g1 + g2);
}

double sample_positive_stable(const SigmaStableParams& p, RngStream& rng) {
  // T = (A(Z)/E)^{(1-sigma)/sigma}, Z uniform, E unit exponential.
  const double z = rng.uniform01();
  const double log_a = log_zolotarev_A(z, p);
  const double e = rng.exponential();
  return std::exp((1.0 - p.sigma) / p.sigma * (log_a - std::log(e)));
}

namespace {

double tilted_stable_naive(const SigmaStableParams& p, double lambda, RngStream& rng) {
  for (long i = 0; i < kMaxRejectIter; ++i) {
    const double t = sample_positive_stable(p, rng);
    if (rng.exponential() > lambda * t) return t;
  }
  throw std::runtime_error("sample_tilted_stable: naive rejection cap exceeded");
}

// Devroye's double-rejection method with Hofert's corrections. Uniformly
// fast in lambda; used when the naive acceptance exp(-lambda^sigma) is poor.
double tilted_stable_double_rejection(const SigmaStableParams& p, double lambda,
                                      RngStream& rng) {
  const double alpha = p.sigma;
  const double lambda_alpha = std::pow(lambda, alpha);
  const double gamma = lambda_alpha * alpha * (1.0 - alpha);
  const double sqrt_gamma = std::sqrt(gamma);
  const double xi = ((2.0 + std::sqrt(kPi / 2.0)) * std::sqrt(2.0 * gamma) + 1.0) / kPi;
  const double psi = std::exp(-gamma * kPi * kPi / 8.0) * (2.0 + std::sqrt(kPi / 2.0)) *
                     std::sqrt(gamma * kPi) / kPi;
  const double w1 = xi * std::sqrt(kPi / (2.0 * gamma));
  const double w2 = 2.0 * psi * std::sqrt(kPi);
  const double w3 = xi * kPi;
  const double b = (1.0 - alpha) / alpha;

  for (long iter = 0; iter < kMaxRejectIter; ++iter) {
    // Outer stage: draw the auxiliary angle U.
    double u_ang = 0.0, zeta = 0.0, z_big = 0.0;
    bool have_u = false;
    for (long inner = 0; inner < kMaxRejectIter && !have_u; ++inner) {
      const double v = rng.uniform01();
      if (gamma >= 1.0) {
        if (v < w1 / (w1 + w2)) {
          u_ang = std::fabs(rng.normal01()) / sqrt_gamma;
        } else {
          const double wp = rng.uniform01();
          u_ang = kPi * (1.0 - wp * wp);
        }
      } else {
        const double wp = rng.uniform01();
        u_ang = (v < w3 / (w2 + w3)) ? kPi * wp : kPi * (1.0 - wp * wp);
      }
      if (!(u_ang > 0.0) || u_ang >= kPi) continue;

      const double w = rng.uniform01();
      zeta = std::exp(0.5 * log_ratio_B(u_ang, alpha));
      if (!(zeta > 1e-250)) continue;  // rho diverges, certain rejection
      const double phi = std::pow(sqrt_gamma + alpha * zeta, 1.0 / alpha);
      z_big = phi / (phi - std::pow(sqrt_gamma, 1.0 / alpha));
      if (!std::isfinite(z_big)) continue;

      double d = 0.0;
      if (gamma >= 1.0) d += xi * std::exp(-gamma * u_ang * u_ang / 2.0);
      d += psi / std::sqrt(kPi - u_ang);
      if (gamma < 1.0) d += xi;

      const double log_rho = std::log(kPi) -
                             lambda_alpha * (1.0 - 1.0 / (zeta * zeta)) + std::log(d) -
                             std::log((1.0 + std::sqrt(kPi / 2.0)) * sqrt_gamma / zeta + z_big);
      if (std::log(w) + log_rho <= 0.0) have_u = true;
    }
    if (!have_u) break;

    // Inner stage: X | U from a three-piece envelope around the mode.
    const double a = zolotarev_a_u(u_ang, alpha);
    const double m = std::pow(b / a, alpha) * lambda_alpha;
    const double delta = std::sqrt(m * alpha / a);
    const double a1 = delta * std::sqrt(kPi / 2.0);
    const double a3 = z_big / a;
    const double s = a1 + delta + a3;

    const double vp = rng.uniform01();
    double x = 0.0, np = 0.0, ep = 0.0;
    if (vp < a1 / s) {
      np = rng.normal01();
      x = m - delta * std::fabs(np);
    } else if (vp < (a1 + delta) / s) {
      x = m + delta * rng.uniform01();
    } else {
      ep = rng.exponential();
      x = m + delta + a3 * ep;
    }
    if (!(x > 0.0)) continue;

    const double e = rng.exponential();
    double cond = a * (x - m) + lambda * (std::pow(x, -b) - std::pow(m, -b));
    if (x < m) cond -= np * np / 2.0;
    if (x > m + delta) cond -= ep;
    if (cond <= e) return std::pow(x, -b);
  }
  throw std::runtime_error("sample_tilted_stable: double rejection cap exceeded");
}

}  // namespace

double sample_tilted_stable(const SigmaStableParams& p, double lambda, RngStream& rng,
                            TiltedMethod method) {
  if (!(lambda >= 0.0)) throw std::domain_error("sample_tilted_stable: lambda must be >= 0");
  if (lambda == 0.0 && method == TiltedMethod::automatic)
    return sample_positive_stable(p, rng);
  if (method == TiltedMethod::automatic)
    method = std::pow(lambda, p.sigma) <= 2.0 ? TiltedMethod::naive
                                              : TiltedMethod::double_rejection;
  return method == TiltedMethod::naive ? tilted_stable_naive(p, lambda, rng)
                                       : tilted_stable_double_rejection(p, lambda, rng);
}

double sample_new_weight_exact(double surplus, const SigmaStableParams& p,
                               RngStream& rng) {
  if (!(surplus > 0.0))
    throw std::domain_error("sample_new_weight_exact: surplus must be positive");
  if (p.sigma != 0.5)
    throw std::domain_error(
        "sample_new_weight_exact: only sigma = 1/2 has an exact identity here; "
        "use sample_new_weight_generic");
  const double g = sample_gamma(0.75, 1.0, rng);
  const double ig = sample_inverse_gamma(0.25, 1.0 / (64.0 * surplus * surplus), rng);
  const double stick = std::sqrt(g) / (std::sqrt(g) + std::sqrt(ig));
  return stick * surplus;
}

double sample_new_weight_generic(double surplus, const PriorSpec& prior,
                                 RngStream& rng) {
  if (!(surplus > 0.0))
    throw std::domain_error("sample_new_weight_generic: surplus must be positive");
  constexpr int kGrid = 512;
  const double v = surplus;
  std::array<double, kGrid + 1> logd;
  const bool stable = prior.is_stable();
  const double ex = stable ? 1.0 / (1.0 - prior.sigma()) : 1.0;

  if (stable) {
    // s = v w^{1/(1-sigma)} absorbs the s^{-sigma} singularity; the
    // transformed density is just f_sigma(v (1 - w^{1/(1-sigma)})).
    for (int i = 0; i <= kGrid; ++i) {
      const double w = static_cast<double>(i) / kGrid;
      const double t = v * (1.0 - std::pow(w, ex));
      logd[i] = t > 0.0 ? detail::log_f_sigma_cached(t, prior.stable_params)
                        : -std::numeric_limits<double>::infinity();
    }
  } else {
    for (int i = 0; i <= kGrid; ++i) {
      const double w = static_cast<double>(i) / kGrid;
      const double s = std::max(v * w, v * 1e-12);
      const double t = v - s;
      logd[i] = t > 0.0 ? prior.log_total_mass_density(t) + prior.log_levy_x(s)
                        : -std::numeric_limits<double>::infinity();
    }
  }

  double peak = -std::numeric_limits<double>::infinity();
  for (double lv : logd) peak = std::max(peak, lv);
  if (!std::isfinite(peak))
    throw std::runtime_error("sample_new_weight_generic: density not finite on grid");

  std::array<double, kGrid + 1> dens;
  for (int i = 0; i <= kGrid; ++i) {
    const double d = logd[i] - peak;
    dens[i] = d < -745.0 ? 0.0 : std::exp(d);
    if (std::isnan(dens[i]))
      throw std::runtime_error("sample_new_weight_generic: NaN density on grid");
  }

  std::array<double, kGrid + 1> cum;
  cum[0] = 0.0;
  for (int i = 0; i < kGrid; ++i) cum[i + 1] = cum[i] + 0.5 * (dens[i] + dens[i + 1]);
  const double total = cum[kGrid];
  if (!(total > 0.0))
    throw std::runtime_error("sample_new_weight_generic: zero mass on grid");

  const double u = rng.uniform01() * total;
  int lo = 0, hi = kGrid;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (cum[mid] <= u ? lo : hi) = mid;
  }
  // Invert the piecewise-linear density within the cell.
  const double target = u - cum[lo];
  const double g0 = dens[lo], g1 = dens[lo + 1];
  const double half_slope = 0.5 * (g1 - g0);
  double frac;
  if (std::fabs(half_slope) < 1e-300) {
    frac = g0 > 0.0 ? target / g0 : 0.5;
  } else {
    const double disc = g0 * g0 + 4.0 * half_slope * target;
    frac = (-g0 + std::sqrt(std::max(disc, 0.0))) / (2.0 * half_slope);
  }
  frac = std::clamp(frac, 0.0, 1.0);
  const double w = (static_cast<double>(lo) + frac) / kGrid;
  double s = stable ? v * std::pow(w, ex) : v * w;
  s = std::clamp(s, v * 1e-15, v * (1.0 - 1e-15));
  return s;
}

double sample_new_weight(double surplus, const PriorSpec& prior, RngStream& rng) {
  if (!prior.is_stable())
    return sample_new_weight_logbeta(surplus, prior.logbeta_params, rng);
  if (prior.sigma() == 0.5) return sample_new_weight_exact(surplus, prior.stable_params, rng);
  return sample_new_weight_generic(surplus, prior, rng);
}

double sample_new_weight_logbeta(double surplus, const LogBetaParams& p, RngStream& rng,
                                 RejectionStats* stats) {
  if (!(surplus > 0.0))
    throw std::domain_error("sample_new_weight_logbeta: surplus must be positive");
  const double v = surplus;
  const double log_b = std::log(p.b);
  // The acceptance rate degrades like v for small surpluses (the target
  // shrinks as (1 - e^{s-v})^{b-1}), so after enough failures switch to the
  // tabulated inverse-CDF draw of the same conditional.
  constexpr long kFallbackAfter = 65536;
  for (long i = 0; i < kFallbackAfter; ++i) {
    const double s = v * rng.uniform01();
    double log_target = std::log(-std::expm1(-p.b * s)) - std::log(-std::expm1(-s));
    if (p.b != 1.0) log_target += (p.b - 1.0) * std::log(-std::expm1(s - v));
    if (stats) ++stats->proposals;
    if (std::log(rng.uniform01()) < log_target - log_b) {
      if (stats) ++stats->accepted;
      return s;
    }
  }
  return sample_new_weight_generic(v, PriorSpec::log_beta(p.a, p.b), rng);
}

double sample_kanter_z(double v, const SigmaStableParams& p, RngStream& rng) {
  if (!(v > 0.0)) throw std::domain_error("sample_kanter_z: v must be positive");
  const double sigma = p.sigma;
  const double c = std::pow(v, -sigma / (1.0 - sigma));
  // sup of A e^{-cA} over the range of A: at A = 1/c when reachable,
  // otherwise at the left endpoint A_min.
  const double log_a_min = (sigma / (1.0 - sigma)) * std::log(sigma) + std::log1p(-sigma);
  const double a_min = std::exp(log_a_min);
  const double log_sup =
      c * a_min <= 1.0 ? -1.0 - std::log(c) : log_a_min - c * a_min;
  for (long i = 0; i < kMaxRejectIter; ++i) {
    const double z = rng.uniform01();
    const double log_a = log_zolotarev_A(z, p);
    const double log_acc = log_a - c * std::exp(log_a) - log_sup;
    if (std::log(rng.uniform01()) < log_acc) return z;
  }
  throw std::runtime_error("sample_kanter_z: rejection cap exceeded");
}

}  // namespace pkmc
