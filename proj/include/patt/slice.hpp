#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "patt/rng.hpp"

namespace patt {

/* Counters shared by the one-dimensional slice-search primitives. */
struct bracket_stats {
  std::uint32_t capped = 0;     // stepping-out hit its per-side expansion cap
  std::uint32_t fallbacks = 0;  // shrinkage bailed out on a vanishing bracket
};

/*
 * Stepping-out interval search: place a width-w interval uniformly at random
 * around x0, then push each end outward in steps of w while it still lies on
 * the slice {s : logf(s) > log_t}, up to max_steps expansions per side. The
 * lower end never crosses `lower` (used for radius searches on (0, inf)).
 * Consumes exactly one uniform draw. Requires logf(x0) > log_t.
 */
template <class F>
std::pair<double, double> step_out(F&& logf, double log_t, double x0, double w, int max_steps,
                                   double lower, rng_stream& rng, bracket_stats& stats) {
  double lo = x0 - w * rng.uniform01();
  double hi = lo + w;
  bool capped = false;
  if (lo < lower) {
    lo = lower;
  } else {
    int left = max_steps;
    while (logf(lo) > log_t) {
      lo -= w;
      if (lo < lower) {
        lo = lower;
        break;
      }
      if (--left <= 0) {
        capped = true;
        break;
      }
    }
  }
  int left = max_steps;
  while (logf(hi) > log_t) {
    hi += w;
    if (--left <= 0) {
      capped = true;
      break;
    }
  }
  if (capped) ++stats.capped;
  return {lo, hi};
}

/*
 * Shrinkage acceptance loop on (lo, hi): draw gamma uniformly, accept when it
 * lies on the slice, otherwise pull the end on gamma's side of x0 in to gamma.
 * Returns the accepted point and stores its logf value in accepted_logf.
 * Degenerate brackets (width below 1e-300) fall back to x0, whose on-slice
 * logf value must be supplied as logf_x0.
 */
template <class F>
double shrink(F&& logf, double log_t, double lo, double hi, double x0, double logf_x0,
              rng_stream& rng, bracket_stats& stats, double& accepted_logf) {
  for (;;) {
    if (!(hi - lo >= 1e-300)) {
      ++stats.fallbacks;
      accepted_logf = logf_x0;
      return x0;
    }
    const double gamma = lo + (hi - lo) * rng.uniform01();
    const double lf = logf(gamma);
    if (lf > log_t) {
      accepted_logf = lf;
      return gamma;
    }
    if (gamma < x0)
      lo = gamma;
    else
      hi = gamma;
  }
}

}  // namespace patt
