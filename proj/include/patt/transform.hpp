#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "patt/affine_map.hpp"
#include "patt/errors.hpp"
#include "patt/linalg.hpp"
#include "patt/moments.hpp"

namespace patt {

enum class centering_kind { none, mean, median };
enum class scaling_kind { none, variance, covariance };

/*
 * Which affine adjustments the tuning loop applies: a centering (sample mean
 * or coordinate-wise median), a scaling (per-coordinate standard deviations or
 * a full covariance factor), or both. epsilon <= 0 selects the default
 * Cholesky regularization seed 1e-10 * max(1, trace/d).
 */
struct adjustment_config {
  centering_kind centering = centering_kind::none;
  scaling_kind scaling = scaling_kind::none;
  double epsilon = 0.0;

  bool any() const { return centering != centering_kind::none || scaling != scaling_kind::none; }
  bool needs_moments() const {
    return centering == centering_kind::mean || scaling != scaling_kind::none;
  }
  bool needs_median() const { return centering == centering_kind::median; }
  bool needs_covariance() const { return scaling == scaling_kind::covariance; }
};

inline constexpr double k_variance_floor = 1e-12;

/*
 * Build the sampling-space map alpha from the current adjustment statistics.
 * Degenerate scales are repaired rather than fatal: variance entries are
 * clamped at k_variance_floor and covariance factors fall back to escalating
 * diagonal regularization; both paths append a warning. With fewer than two
 * absorbed samples the identity map is returned (also warned).
 */
inline affine_map build_transform(const adjustment_config& cfg, Eigen::Index dim,
                                  const running_moments* moments, const median_buffer* medians,
                                  std::vector<std::string>* warnings = nullptr) {
  auto warn = [&](const std::string& s) {
    if (warnings != nullptr) warnings->push_back(s);
  };
  if (!cfg.any()) return affine_map::identity(dim);
  if (cfg.needs_moments() && (moments == nullptr || moments->count() < 2)) {
    warn("transform: fewer than two samples absorbed, keeping identity");
    return affine_map::identity(dim);
  }
  if (cfg.needs_median() && (medians == nullptr || medians->count() == 0)) {
    warn("transform: no samples for median centering, keeping identity");
    return affine_map::identity(dim);
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  if (cfg.centering == centering_kind::mean) c = moments->mean();
  if (cfg.centering == centering_kind::median) c = medians->median();

  switch (cfg.scaling) {
    case scaling_kind::none:
      return affine_map::shift(std::move(c));
    case scaling_kind::variance: {
      Eigen::VectorXd v = moments->sd();
      if (v.minCoeff() < k_variance_floor) {
        v = v.cwiseMax(k_variance_floor);
        warn("transform: scale entries clamped at the variance floor");
      }
      return affine_map::diagonal(std::move(v), std::move(c));
    }
    case scaling_kind::covariance: {
      cholesky_result ch = cholesky_regularized(moments->covariance(), cfg.epsilon);
      if (ch.regularization_steps > 0)
        warn("transform: covariance regularized with epsilon " + std::to_string(ch.epsilon_used));
      return affine_map::general(std::move(ch.L), std::move(c));
    }
  }
  return affine_map::identity(dim);
}

}  // namespace patt
