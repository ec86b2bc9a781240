#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "patt/errors.hpp"
#include "patt/transform.hpp"

namespace patt {

/*
 * Update-time schedule for the tuning loop: the (a priori infinite) sequence
 * of iteration indices at which the transform is rebuilt. realize() truncates
 * to the run length, dropping times beyond it; realized times are strictly
 * increasing and at least 2, so every update sees two or more samples per
 * chain.
 */
class update_schedule {
 public:
  enum class kind { none, linear, exponential, every_iteration, explicit_times };

  update_schedule() : kind_(kind::none) {}

  // s_k = floor(a * k + b)
  static update_schedule linear(double a, double b = 0.0) {
    if (!(a > 0.0)) throw usage_error("update_schedule: linear factor must be positive");
    update_schedule s;
    s.kind_ = kind::linear;
    s.a_ = a;
    s.b_ = b;
    return s;
  }

  // s_k = floor(a^(k + b))
  static update_schedule exponential(double a = 1.5, double b = 16.0) {
    if (!(a > 1.0)) throw usage_error("update_schedule: exponential base must exceed 1");
    update_schedule s;
    s.kind_ = kind::exponential;
    s.a_ = a;
    s.b_ = b;
    return s;
  }

  static update_schedule every_iteration() {
    update_schedule s;
    s.kind_ = kind::every_iteration;
    return s;
  }

  static update_schedule none() { return update_schedule(); }

  static update_schedule explicit_times(std::vector<std::int64_t> times) {
    update_schedule s;
    s.kind_ = kind::explicit_times;
    std::int64_t prev = 1;
    for (std::int64_t t : times) {
      if (t < 2) throw usage_error("update_schedule: explicit times must be >= 2");
      if (t <= prev && prev != 1) throw usage_error("update_schedule: explicit times must be strictly increasing");
      prev = t;
    }
    s.times_ = std::move(times);
    return s;
  }

  /*
   * Default schedules by adjustment type: exponential growth for median
   * centering (first update at floor(1.5^17) = 985), linear max(d,25)*p*k when
   * a covariance factor is estimated, linear 25*p*k otherwise. p is the number
   * of chains feeding one accumulator (1 for per-chain tuning).
   */
  static update_schedule default_for(const adjustment_config& cfg, Eigen::Index d, int p) {
    if (!cfg.any()) return none();
    if (cfg.centering == centering_kind::median) return exponential(1.5, 16.0);
    const double chains = static_cast<double>(p);
    if (cfg.scaling == scaling_kind::covariance)
      return linear(std::max<double>(static_cast<double>(d), 25.0) * chains);
    return linear(25.0 * chains);
  }

  kind generator() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<std::int64_t>& times() const { return times_; }

  std::vector<std::int64_t> realize(std::int64_t n_its) const {
    std::vector<std::int64_t> out;
    switch (kind_) {
      case kind::none:
        break;
      case kind::every_iteration:
        for (std::int64_t t = 2; t <= n_its; ++t) out.push_back(t);
        break;
      case kind::explicit_times:
        for (std::int64_t t : times_)
          if (t <= n_its) out.push_back(t);
        break;
      case kind::linear:
        for (std::int64_t k = 1;; ++k) {
          const double v = std::floor(a_ * static_cast<double>(k) + b_);
          if (v > static_cast<double>(n_its)) break;
          const auto t = static_cast<std::int64_t>(v);
          if (t >= 2 && (out.empty() || t > out.back())) out.push_back(t);
        }
        break;
      case kind::exponential:
        for (std::int64_t k = 1;; ++k) {
          const double v = std::floor(std::pow(a_, static_cast<double>(k) + b_));
          if (v > static_cast<double>(n_its)) break;
          const auto t = static_cast<std::int64_t>(v);
          if (t >= 2 && (out.empty() || t > out.back())) out.push_back(t);
        }
        break;
    }
    return out;
  }

 private:
  kind kind_;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<std::int64_t> times_;
};

}  // namespace patt
