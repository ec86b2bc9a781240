#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "patt/errors.hpp"

namespace patt {

/*
 * Integrated autocorrelation time via the initial monotone positive sequence
 * estimator: sum normalized autocovariances in even/odd lag pairs, stop at the
 * first nonpositive pair, enforce monotonicity of the pair sums, floor the
 * result at 1. Autocovariances are computed directly (no FFT) and lazily, one
 * lag at a time, so only lags up to the truncation point are ever touched;
 * the lag cap is floor(n/3). Degenerate series (zero variance) return NaN.
 */
inline double integrated_autocorr_time(const double* y, std::int64_t n) {
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (std::int64_t i = 0; i < n; ++i) mean += y[i];
  mean /= static_cast<double>(n);

  std::vector<double> z(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = y[i] - mean;

  auto gamma = [&](std::int64_t k) {
    double s = 0.0;
    for (std::int64_t i = 0; i + k < n; ++i)
      s += z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i + k)];
    return s / static_cast<double>(n);
  };

  const double g0 = gamma(0);
  if (!(g0 > 0.0) || !std::isfinite(g0)) return std::numeric_limits<double>::quiet_NaN();

  const std::int64_t max_lag = n / 3;
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::int64_t m = 0;; ++m) {
    const std::int64_t k0 = 2 * m;
    const std::int64_t k1 = 2 * m + 1;
    if (k0 > max_lag) break;
    double pair = gamma(k0) / g0;
    if (k1 <= max_lag) pair += gamma(k1) / g0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
  }
  return std::max(1.0, 2.0 * sum - 1.0);
}

inline double integrated_autocorr_time(const std::vector<double>& y) {
  return integrated_autocorr_time(y.data(), static_cast<std::int64_t>(y.size()));
}

/*
 * Mean over per-chain, per-coordinate autocorrelation times of the given
 * trajectory blocks (one rows-by-dim matrix per chain). Degenerate marginals
 * are excluded from the mean; their number is reported through n_degenerate.
 */
inline double mean_autocorr_time(const std::vector<Eigen::MatrixXd>& blocks,
                                 int* n_degenerate = nullptr) {
  double sum = 0.0;
  std::int64_t used = 0;
  int degenerate = 0;
  std::vector<double> series;
  for (const Eigen::MatrixXd& b : blocks) {
    series.resize(static_cast<std::size_t>(b.rows()));
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      for (Eigen::Index i = 0; i < b.rows(); ++i) series[static_cast<std::size_t>(i)] = b(i, j);
      const double t = integrated_autocorr_time(series);
      if (std::isnan(t)) {
        ++degenerate;
      } else {
        sum += t;
        ++used;
      }
    }
  }
  if (n_degenerate != nullptr) *n_degenerate = degenerate;
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / static_cast<double>(used);
}

/* Mean Euclidean step size over consecutive rows of a trajectory block. */
inline double mean_step_size(const Eigen::Ref<const Eigen::MatrixXd>& path) {
  const Eigen::Index n = path.rows();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) s += (path.row(i) - path.row(i - 1)).norm();
  return s / static_cast<double>(n - 1);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/* Kolmogorov-Smirnov statistic of a sample against a continuous CDF. */
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw usage_error("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
  }
  return d;
}

/*
 * Asymptotic Kolmogorov-Smirnov p-value with the finite-sample correction
 * lambda = D (sqrt(n) + 0.12 + 0.11/sqrt(n)).
 */
inline double ks_pvalue(double d_stat, std::int64_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lam = d_stat * (rn + 0.12 + 0.11 / rn);
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * lam * lam * static_cast<double>(k) * static_cast<double>(k));
    p += 2.0 * sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace patt
