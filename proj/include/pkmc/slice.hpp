// Apache License, Version 2.0, refer to LICENSE.txt
//
// Univariate slice sampler, stepping-out plus shrinkage as in Neal (2003),
// with hard support bounds handled by interval truncation.

#ifndef PKMC_SLICE_HPP
#define PKMC_SLICE_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pkmc/random_kit.hpp"

namespace pkmc {

struct SliceConfig {
  double width = 1.0;  // initial interval width
  int max_steps = 32;  // stepping-out cap, split randomly between both sides
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// One slice-sampling transition leaving exp(log_density) invariant. The
// returned point always has a finite log density and lies inside the bounds.
template <class LogDensity>
double slice_sample(LogDensity&& log_density, double x0, const SliceConfig& cfg,
                    RngStream& rng) {
  if (!(cfg.width > 0.0)) throw std::invalid_argument("slice_sample: width must be positive");
  if (!(cfg.lower < cfg.upper)) throw std::invalid_argument("slice_sample: empty support");
  if (!(x0 > cfg.lower && x0 < cfg.upper))
    throw std::invalid_argument("slice_sample: x0 outside bounds");

  const double g0 = log_density(x0);
  if (!std::isfinite(g0)) throw std::invalid_argument("slice_sample: log density not finite at x0");

  const double log_y = g0 - rng.exponential();

  // Initial interval around x0, then step out until both ends leave the slice
  // or the step budget runs out.
  const double u = rng.uniform01();
  double left = x0 - cfg.width * u;
  double right = left + cfg.width;
  int j = static_cast<int>(rng.uniform01() * cfg.max_steps);
  int k = cfg.max_steps - 1 - j;
  while (j > 0 && left > cfg.lower && log_density(left) > log_y) {
    left -= cfg.width;
    --j;
  }
  while (k > 0 && right < cfg.upper && log_density(right) > log_y) {
    right += cfg.width;
    --k;
  }
  if (left < cfg.lower) left = cfg.lower;
  if (right > cfg.upper) right = cfg.upper;

  // Shrinkage.
  const double min_width = 1e-14 * std::max(1.0, std::fabs(x0));
  for (;;) {
    if (right - left < min_width) throw std::runtime_error("slice_sample: interval collapsed");
    const double x1 = left + rng.uniform01() * (right - left);
    if (log_density(x1) > log_y) return x1;
    if (x1 < x0)
      left = x1;
    else
      right = x1;
  }
}

}  // namespace pkmc

#endif
