// Apache License, Version 2.0, refer to LICENSE.txt

#include "pkmc/stable_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pkmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSigmaLo = 0.05;
constexpr double kSigmaHi = 0.95;
constexpr double kZEps = 1e-12;  // quadrature window (eps, 1-eps)

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// log(exp(a) - exp(b)) for a >= b.
double log_sub_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double d = b - a;
  if (d >= 0.0) return -std::numeric_limits<double>::infinity();
  return a + std::log1p(-std::exp(d));
}

// Signed log-space accumulator for alternating series.
struct SignedLogSum {
  int sign = 0;
  double logmag = -std::numeric_limits<double>::infinity();

  void add(int s, double lm) {
    if (s == 0 || lm == -std::numeric_limits<double>::infinity()) return;
    if (sign == 0) {
      sign = s;
      logmag = lm;
      return;
    }
    if (s == sign) {
      logmag = log_add_exp(logmag, lm);
    } else if (lm > logmag) {
      logmag = log_sub_exp(lm, logmag);
      sign = s;
    } else {
      logmag = log_sub_exp(logmag, lm);
    }
  }
};

// t-independent series coefficients for one sigma, cached per thread.
struct SeriesCoefs {
  std::vector<double> logc;  // log|sin(pi sigma j)| + lgamma(sigma j + 1) - lgamma(j + 1)
  std::vector<int> sign;     // sign of (-1)^{j+1} sin(pi sigma j); 0 = vanishing term
};

const SeriesCoefs& series_coefs(double sigma, int max_terms) {
  thread_local std::unordered_map<double, std::unique_ptr<SeriesCoefs>> cache;
  auto& slot = cache[sigma];
  if (!slot) slot = std::make_unique<SeriesCoefs>();
  auto& c = *slot;
  const std::size_t need = static_cast<std::size_t>(max_terms) + 1;
  if (c.logc.size() < need) {
    c.logc.resize(need);
    c.sign.resize(need);
    c.logc[0] = -std::numeric_limits<double>::infinity();
    c.sign[0] = 0;
    for (std::size_t j = 1; j < need; ++j) {
      const double dj = static_cast<double>(j);
      const double s = std::sin(kPi * sigma * dj);
      if (std::fabs(s) < 1e-13) {
        c.sign[j] = 0;
        c.logc[j] = -std::numeric_limits<double>::infinity();
        continue;
      }
      c.logc[j] = std::log(std::fabs(s)) + std::lgamma(sigma * dj + 1.0) - std::lgamma(dj + 1.0);
      int sg = s > 0.0 ? 1 : -1;
      if (j % 2 == 0) sg = -sg;  // (-1)^{j+1}
      c.sign[j] = sg;
    }
  }
  return c;
}

// Adaptive Simpson on [a,b] for a nonnegative integrand already shifted to
// O(1) scale. The tolerance is floored near double precision so roundoff
// noise cannot drive unbounded subdivision.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  const double half_tol = std::max(0.5 * tol, 5e-17);
  return adaptive_simpson(f, a, m, fa, flm, fm, left, half_tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, half_tol, depth - 1);
}

template <class F>
double integrate_panel(const F& f, double a, double b, double tol, int depth) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth);
}

double log_zolotarev_A_u(double u, double sigma) {
  // A as a function of u = pi z on (0, pi); finite limit
  // sigma^{sigma/(1-sigma)} (1-sigma) as u -> 0.
  if (u < kZEps * kPi)
    return (sigma / (1.0 - sigma)) * std::log(sigma) + std::log1p(-sigma);
  const double su = std::sin(u);
  if (!(su > 0.0)) throw std::domain_error("zolotarev_A: argument outside (0,1)");
  return (sigma * std::log(std::sin(sigma * u)) +
          (1.0 - sigma) * std::log(std::sin((1.0 - sigma) * u)) - std::log(su)) /
         (1.0 - sigma);
}

void check_sigma(double sigma) {
  if (!(sigma > kSigmaLo && sigma < kSigmaHi))
    throw std::domain_error("sigma must lie in (0.05, 0.95), got " + std::to_string(sigma));
}

}  // namespace

SigmaStableParams::SigmaStableParams(double sigma_) : sigma(sigma_) {
  check_sigma(sigma);
  if (sigma == 0.5) rational = std::make_pair(1, 2);
}

SigmaStableParams::SigmaStableParams(int u, int v) {
  if (u <= 0 || v <= 0 || u >= v) throw std::domain_error("rational sigma requires 0 < u < v");
  if (std::gcd(u, v) != 1) throw std::domain_error("rational sigma requires coprime u, v");
  sigma = static_cast<double>(u) / static_cast<double>(v);
  check_sigma(sigma);
  rational = std::make_pair(u, v);
}

LogBetaParams::LogBetaParams(double a_, double b_) : a(a_), b(b_) {
  if (!(a > 0.0)) throw std::domain_error("-logBeta requires a > 0");
  if (!(b >= 1.0)) throw std::domain_error("-logBeta requires b >= 1");
}

TiltFunction TiltFunction::pitman_yor(double theta) {
  TiltFunction t;
  t.kind = Kind::pitman_yor;
  t.theta = theta;
  return t;
}

TiltFunction TiltFunction::normalized_stable() {
  TiltFunction t;
  t.kind = Kind::normalized_stable;
  return t;
}

TiltFunction TiltFunction::ngg(double tau) {
  if (!(tau > 0.0)) throw std::domain_error("NGG requires tau > 0");
  TiltFunction t;
  t.kind = Kind::ngg;
  t.tau = tau;
  return t;
}

TiltFunction TiltFunction::logbeta_unit() {
  TiltFunction t;
  t.kind = Kind::logbeta_unit;
  return t;
}

double log_zolotarev_A(double z, const SigmaStableParams& p) {
  if (!(z > 0.0 && z < 1.0)) throw std::domain_error("zolotarev_A: z must lie in (0,1)");
  const double sigma = p.sigma;
  if (z < kZEps) {
    // Finite limit sigma^{sigma/(1-sigma)} (1-sigma) as z -> 0.
    return (sigma / (1.0 - sigma)) * std::log(sigma) + std::log1p(-sigma);
  }
  return log_zolotarev_A_u(kPi * z, sigma);
}

double zolotarev_A(double z, const SigmaStableParams& p) {
  return std::exp(log_zolotarev_A(z, p));
}

double log_f_sigma_quadrature(double t, const SigmaStableParams& p) {
  if (!(t > 0.0)) throw std::domain_error("log_f_sigma_quadrature: t must be positive");
  const double sigma = p.sigma;
  const double c = std::pow(t, -sigma / (1.0 - sigma));
  if (!std::isfinite(c))
    throw std::runtime_error("log_f_sigma_quadrature: t too extreme for the exponent");

  const auto log_phi = [&](double z) -> double {
    if (z <= 0.0) z = kZEps;
    if (z >= 1.0) return -std::numeric_limits<double>::infinity();
    const double la = log_zolotarev_A(z, p);
    const double a = std::exp(la);
    return la - c * a;
  };

  // The integrand A e^{-cA} is unimodal in z; locate the peak by golden
  // section, starting from a coarse scan.
  double z_best = kZEps, m_best = log_phi(kZEps);
  for (int i = 1; i <= 64; ++i) {
    const double z = static_cast<double>(i) / 65.0;
    const double v = log_phi(z);
    if (v > m_best) {
      m_best = v;
      z_best = z;
    }
  }
  {
    double lo = std::max(kZEps, z_best - 0.03), hi = std::min(1.0 - kZEps, z_best + 0.03);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = log_phi(x1), f2 = log_phi(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = log_phi(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = log_phi(x1);
      }
    }
    const double zm = 0.5 * (lo + hi);
    const double fm = log_phi(zm);
    if (fm > m_best) {
      m_best = fm;
      z_best = zm;
    }
  }

  const double shift = m_best;
  const auto g = [&](double z) -> double {
    const double v = log_phi(z) - shift;
    return v < -745.0 ? 0.0 : std::exp(v);
  };

  std::vector<double> knots = {kZEps, 1e-8,  1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1,
                               0.25,  0.5,   0.75, 0.9,  0.97, 0.995, 1.0 - 1e-7,
                               1.0 - kZEps};
  knots.push_back(z_best);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    integral += integrate_panel(g, knots[i], knots[i + 1], 5e-14, 40);
  if (!(integral > 0.0) || !std::isfinite(integral))
    throw std::runtime_error("log_f_sigma_quadrature: quadrature failed at t=" + std::to_string(t));

  return std::log(sigma / (1.0 - sigma)) - std::log(t) / (1.0 - sigma) + shift +
         std::log(integral);
}

double log_f_sigma(double t, const SigmaStableParams& p, double tol, int max_terms) {
  if (!(t > 0.0)) throw std::domain_error("log_f_sigma: t must be positive");
  if (!(tol > 0.0)) throw std::domain_error("log_f_sigma: tol must be positive");
  const double sigma = p.sigma;
  const double log_t = std::log(t);
  const auto& coefs = series_coefs(sigma, max_terms);

  SignedLogSum sum;
  double max_term = -std::numeric_limits<double>::infinity();
  double prev_term = std::numeric_limits<double>::infinity();
  int small_run = 0;
  bool converged = false;
  const double log_tol = std::log(tol);

  for (int j = 1; j <= max_terms; ++j) {
    if (coefs.sign[j] == 0) continue;
    const double lm = coefs.logc[j] - (sigma * j + 1.0) * log_t;
    sum.add(coefs.sign[j], lm);
    max_term = std::max(max_term, lm);
    const bool decreasing = lm < prev_term;
    prev_term = lm;
    if (decreasing && sum.sign != 0 && lm < log_tol + sum.logmag) {
      if (++small_run >= 2) {
        converged = true;
        break;
      }
    } else {
      small_run = 0;
    }
  }

  // Cancellation guard: more than 8 decimal digits lost against the largest
  // term means the alternating series cannot be trusted.
  const double loss_limit = 8.0 * std::log(10.0);
  if (!converged || sum.sign <= 0 || max_term - sum.logmag > loss_limit)
    return log_f_sigma_quadrature(t, p);

  return sum.logmag - std::log(kPi);
}

double log_levy_sigma(double x, const SigmaStableParams& p) {
  if (!(x > 0.0)) throw std::domain_error("log_levy_sigma: x must be positive");
  return std::log(p.sigma) - std::lgamma(1.0 - p.sigma) - (p.sigma + 1.0) * std::log(x);
}

double log_f_logbeta(double t, const LogBetaParams& p) {
  if (!(t > 0.0)) throw std::domain_error("log_f_logbeta: t must be positive");
  double v = std::lgamma(p.a + p.b) - std::lgamma(p.a) - std::lgamma(p.b) - p.a * t;
  if (p.b != 1.0) v += (p.b - 1.0) * std::log(-std::expm1(-t));
  return v;
}

double log_levy_logbeta(double x, const LogBetaParams& p) {
  if (!(x > 0.0)) throw std::domain_error("log_levy_logbeta: x must be positive");
  // expm1 keeps both ratio factors accurate down to x -> 0, where
  // rho(x) ~ b e^{-a x} / x.
  return -p.a * x + std::log(-std::expm1(-p.b * x)) - std::log(x) -
         std::log(-std::expm1(-x));
}

namespace detail {

namespace {

struct DensityTable {
  static constexpr double kLo = -18.420680743952367;  // log 1e-8
  static constexpr double kHi = 18.420680743952367;   // log 1e8
  static constexpr int kN = 4096;
  std::vector<double> logf;  // at x_i = kLo + i step, x = log t
  double step = (kHi - kLo) / (kN - 1);
};

}  // namespace

double log_f_sigma_cached(double t, const SigmaStableParams& p) {
  if (!(t > 0.0)) throw std::domain_error("log_f_sigma_cached: t must be positive");
  const double x = std::log(t);
  if (x <= DensityTable::kLo + 2e-2 || x >= DensityTable::kHi - 2e-2)
    return log_f_sigma(t, p);

  thread_local std::unordered_map<double, std::unique_ptr<DensityTable>> cache;
  auto& slot = cache[p.sigma];
  if (!slot) {
    slot = std::make_unique<DensityTable>();
    slot->logf.resize(DensityTable::kN);
    for (int i = 0; i < DensityTable::kN; ++i)
      slot->logf[i] = log_f_sigma(std::exp(DensityTable::kLo + i * slot->step), p);
  }
  const DensityTable& tab = *slot;

  // 4-point Lagrange interpolation in log t.
  double pos = (x - DensityTable::kLo) / tab.step;
  int i1 = static_cast<int>(pos);
  i1 = std::clamp(i1, 1, DensityTable::kN - 3);
  const double u = pos - i1;
  const double f0 = tab.logf[i1 - 1], f1 = tab.logf[i1], f2 = tab.logf[i1 + 1],
               f3 = tab.logf[i1 + 2];
  return f1 + u * (-f0 / 3.0 - f1 / 2.0 + f2 - f3 / 6.0) +
         u * u * (f0 / 2.0 - f1 + f2 / 2.0) +
         u * u * u * (-f0 / 6.0 + f1 / 2.0 - f2 / 2.0 + f3 / 6.0);
}

}  // namespace detail

double ngg_tilt_rate(const TiltFunction& tilt, const SigmaStableParams& p) {
  if (tilt.kind != TiltFunction::Kind::ngg)
    throw std::domain_error("ngg_tilt_rate: tilt is not NGG");
  return std::pow(tilt.tau, 1.0 / p.sigma);
}

double log_h(double t, const TiltFunction& tilt, const SigmaStableParams& p) {
  if (!(t > 0.0)) throw std::domain_error("log_h: t must be positive");
  switch (tilt.kind) {
    case TiltFunction::Kind::pitman_yor:
      return -tilt.theta * std::log(t);
    case TiltFunction::Kind::normalized_stable:
      return 0.0;
    case TiltFunction::Kind::ngg:
      return -ngg_tilt_rate(tilt, p) * t;
    case TiltFunction::Kind::logbeta_unit:
      return 0.0;
  }
  throw std::logic_error("log_h: unreachable");
}

}  // namespace pkmc
