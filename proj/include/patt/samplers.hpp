#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "patt/affine_map.hpp"
#include "patt/errors.hpp"
#include "patt/linalg.hpp"
#include "patt/moments.hpp"
#include "patt/rng.hpp"
#include "patt/slice.hpp"
#include "patt/targets.hpp"

namespace patt {

enum class sampler_kind { gpss, gp_ess, hruss, rwm, imh, adarwm };

inline const char* sampler_kind_name(sampler_kind k) {
  switch (k) {
    case sampler_kind::gpss: return "gpss";
    case sampler_kind::gp_ess: return "gp-ess";
    case sampler_kind::hruss: return "hruss";
    case sampler_kind::rwm: return "rwm";
    case sampler_kind::imh: return "imh";
    case sampler_kind::adarwm: return "adarwm";
  }
  return "?";
}

inline sampler_kind sampler_kind_from_name(const std::string& s) {
  if (s == "gpss") return sampler_kind::gpss;
  if (s == "gp-ess") return sampler_kind::gp_ess;
  if (s == "hruss") return sampler_kind::hruss;
  if (s == "rwm") return sampler_kind::rwm;
  if (s == "imh") return sampler_kind::imh;
  if (s == "adarwm") return sampler_kind::adarwm;
  throw usage_error("unknown sampler kind '" + s + "'");
}

struct sampler_params {
  sampler_kind kind = sampler_kind::gpss;
  double w = 3.0;          // slice interval width (gpss default 3, hruss 1)
  double sigma = 1.0;      // proposal scale (rwm, imh)
  double beta = 0.05;      // adarwm weight of the narrow mixture component
  int max_step_out = 1000; // stepping-out expansion cap per side
};

inline sampler_params default_params(sampler_kind k) {
  sampler_params p;
  p.kind = k;
  if (k == sampler_kind::hruss) p.w = 1.0;
  return p;
}

/* Result of one kernel application in the kernel's own coordinates. */
struct step_outcome {
  Eigen::VectorXd y;
  double logf_y = 0.0;  // target log-density at y, reusable as the next cache
  bool accepted = true; // Metropolis kernels only; slice kernels always move on-slice
  bracket_stats stats;
};

/*
 * Optional location/scale frame (c, L) for the kernels that admit one
 * (rwm / imh / gp-ess). Null members mean zero center and identity factor;
 * that unit frame is what the transform-conjugation wrapper uses.
 */
struct kernel_frame {
  const Eigen::VectorXd* c = nullptr;
  const Eigen::MatrixXd* L = nullptr;
};

namespace detail {

inline Eigen::VectorXd frame_scale(const kernel_frame& f, const Eigen::VectorXd& z) {
  if (f.L == nullptr) return z;
  return f.L->triangularView<Eigen::Lower>() * z;
}

inline Eigen::VectorXd frame_center_plus(const kernel_frame& f, const Eigen::VectorXd& v) {
  if (f.c == nullptr) return v;
  return *f.c + v;
}

}  // namespace detail

/*
 * Random-walk proposal kernel: propose y + sigma * L z, accept by target
 * ratio. Draw order: d-dimensional normal, then one uniform.
 */
template <class F>
step_outcome rwm_step(F&& logf, const Eigen::VectorXd& y, double logf_y, const sampler_params& prm,
                      const kernel_frame& frame, rng_stream& rng) {
  Eigen::VectorXd z = rng.normal_vector(y.size());
  Eigen::VectorXd cand = y + prm.sigma * detail::frame_scale(frame, z);
  const double lf = logf(cand);
  const double u = rng.uniform01();
  step_outcome out;
  if (std::log(u) < lf - logf_y) {
    out.y = std::move(cand);
    out.logf_y = lf;
    out.accepted = true;
  } else {
    out.y = y;
    out.logf_y = logf_y;
    out.accepted = false;
  }
  return out;
}

/*
 * Independence proposal kernel: propose from N(c, sigma^2 L L^T), accept by
 * the ratio of target to proposal density. Draw order: normal vector, then
 * one uniform.
 */
template <class F>
step_outcome imh_step(F&& logf, const Eigen::VectorXd& y, double logf_y, const sampler_params& prm,
                      const kernel_frame& frame, rng_stream& rng) {
  Eigen::VectorXd z = rng.normal_vector(y.size());
  Eigen::VectorXd cand = detail::frame_center_plus(frame, prm.sigma * detail::frame_scale(frame, z));
  const double lf = logf(cand);
  const double log_ratio = (lf - mvn_logpdf(cand, frame.c, frame.L, prm.sigma)) -
                           (logf_y - mvn_logpdf(y, frame.c, frame.L, prm.sigma));
  const double u = rng.uniform01();
  step_outcome out;
  if (std::log(u) < log_ratio) {
    out.y = std::move(cand);
    out.logf_y = lf;
    out.accepted = true;
  } else {
    out.y = y;
    out.logf_y = logf_y;
    out.accepted = false;
  }
  return out;
}

/*
 * Elliptical slice transition targeting the ratio phi(y) = rho(y) / N(y; c, L L^T),
 * run on the ellipse through y and an auxiliary draw v ~ N(c, L L^T). The
 * angle bracket starts at [omega - 2pi, omega] and shrinks toward 0, so the
 * current point is always reachable and the loop terminates. Draw order:
 * threshold uniform, normal vector, angle uniform, then one uniform per
 * shrink.
 */
template <class F>
step_outcome gp_ess_step(F&& logf, const Eigen::VectorXd& y, double logf_y,
                         const kernel_frame& frame, rng_stream& rng) {
  const double log_t = (logf_y - mvn_logpdf(y, frame.c, frame.L)) + std::log(rng.uniform01());
  Eigen::VectorXd v = detail::frame_center_plus(frame, detail::frame_scale(frame, rng.normal_vector(y.size())));
  const Eigen::VectorXd yc = (frame.c == nullptr) ? y : Eigen::VectorXd(y - *frame.c);
  const Eigen::VectorXd vc = (frame.c == nullptr) ? v : Eigen::VectorXd(v - *frame.c);

  double omega = 2.0 * M_PI * rng.uniform01();
  double omega_min = omega - 2.0 * M_PI;
  double omega_max = omega;
  step_outcome out;
  for (;;) {
    Eigen::VectorXd cand = std::cos(omega) * yc + std::sin(omega) * vc;
    if (frame.c != nullptr) cand += *frame.c;
    const double lf = logf(cand);
    if (lf - mvn_logpdf(cand, frame.c, frame.L) > log_t) {
      out.y = std::move(cand);
      out.logf_y = lf;
      return out;
    }
    if (omega < 0.0)
      omega_min = omega;
    else
      omega_max = omega;
    if (!(omega_max - omega_min >= 1e-300)) {
      ++out.stats.fallbacks;
      out.y = y;
      out.logf_y = logf_y;
      return out;
    }
    omega = omega_min + (omega_max - omega_min) * rng.uniform01();
  }
}

/*
 * Polar slice transition on the radially weighted density
 * rho1(y) = ||y||^(d-1) rho(y): threshold draw, geodesic direction update on
 * the unit sphere (great circle through the current direction, angle bracket
 * as in the elliptical kernel), then a radius update via stepping-out and
 * shrinkage on (0, inf). In one dimension the direction update degenerates to
 * a sign-flip proposal. Draw order: threshold uniform; direction normals and
 * angle uniforms; one uniform for interval placement plus one per radius
 * shrink.
 */
template <class F>
step_outcome gpss_step(F&& logf, const Eigen::VectorXd& y, double logf_y, const sampler_params& prm,
                       rng_stream& rng) {
  const Eigen::Index d = y.size();
  const double dm1 = static_cast<double>(d - 1);
  const double r = y.norm();
  Eigen::VectorXd theta;
  if (r > 0.0) {
    theta = y / r;
  } else {
    theta = Eigen::VectorXd::Zero(d);
    theta(0) = 1.0;
  }

  // Radial weight d-1 vanishes for d == 1, where log(r) may be -inf; keep the
  // product well-defined in that case.
  auto radial = [dm1](double s) { return dm1 > 0.0 ? dm1 * std::log(s) : 0.0; };

  const double log_u = std::log(rng.uniform01());
  // Slice threshold on rho1; the direction stage compares at fixed radius, so
  // the radial factor cancels and the threshold reduces to logf_y + log_u.
  const double ang_t = logf_y + log_u;
  const double log_t = radial(r) + ang_t;

  step_outcome out;
  double lf_theta = logf_y;
  if (d == 1) {
    Eigen::VectorXd cand = -theta * r;
    const double lf = logf(cand);
    if (lf > ang_t) {
      theta = -theta;
      lf_theta = lf;
    }
  } else {
    Eigen::VectorXd g;
    double ng = 0.0;
    do {
      g = rng.normal_vector(d);
      g -= g.dot(theta) * theta;
      ng = g.norm();
    } while (ng < 1e-14);
    g /= ng;

    double omega = 2.0 * M_PI * rng.uniform01();
    double omega_min = omega - 2.0 * M_PI;
    double omega_max = omega;
    for (;;) {
      Eigen::VectorXd cand = std::cos(omega) * theta + std::sin(omega) * g;
      const double lf = logf(r * cand);
      if (lf > ang_t) {
        theta = std::move(cand);
        lf_theta = lf;
        break;
      }
      if (omega < 0.0)
        omega_min = omega;
      else
        omega_max = omega;
      if (!(omega_max - omega_min >= 1e-300)) {
        ++out.stats.fallbacks;
        break;
      }
      omega = omega_min + (omega_max - omega_min) * rng.uniform01();
    }
  }

  // Radius stage on s > 0; s <= 0 is off-slice by definition and costs no
  // target evaluation.
  auto line = [&](double s) {
    if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
    return radial(s) + logf(s * theta);
  };
  auto [lo, hi] = step_out(line, log_t, r, prm.w, prm.max_step_out, 0.0, rng, out.stats);
  double accepted_line = 0.0;
  const double s_new = shrink(line, log_t, lo, hi, r, radial(r) + lf_theta, rng, out.stats,
                              accepted_line);
  out.y = s_new * theta;
  out.logf_y = accepted_line - radial(s_new);
  return out;
}

/*
 * Uniform-direction slice transition: threshold draw, one random direction on
 * the unit sphere, then stepping-out and shrinkage along the full line. Draw
 * order: threshold uniform, direction normals, interval-placement uniform,
 * one uniform per shrink.
 */
template <class F>
step_outcome hruss_step(F&& logf, const Eigen::VectorXd& y, double logf_y,
                        const sampler_params& prm, rng_stream& rng) {
  const double log_t = logf_y + std::log(rng.uniform01());
  Eigen::VectorXd v;
  double nv = 0.0;
  do {
    v = rng.normal_vector(y.size());
    nv = v.norm();
  } while (nv < 1e-300);
  v /= nv;

  step_outcome out;
  auto line = [&](double gamma) { return logf(y + gamma * v); };
  auto [lo, hi] = step_out(line, log_t, 0.0, prm.w, prm.max_step_out,
                           -std::numeric_limits<double>::infinity(), rng, out.stats);
  double accepted = 0.0;
  const double gamma = shrink(line, log_t, lo, hi, 0.0, logf_y, rng, out.stats, accepted);
  out.y = y + gamma * v;
  out.logf_y = accepted;
  return out;
}

/* Per-chain adaptation state of the adaptive random-walk baseline. */
struct adaptive_walk_state {
  explicit adaptive_walk_state(Eigen::Index d) : moments(d, true) {}
  running_moments moments;  // over all past states of this chain, repeats included
};

/*
 * Adaptive random-walk baseline. Once the chain has seen at least 2*d states
 * and their covariance admits a Cholesky factor, proposals come from the
 * mixture beta * N(y, 0.1^2/d I) + (1-beta) * N(y, 2.38^2/d Sigma_n); before
 * that (or on factorization failure) only the narrow component is used. The
 * mixture indicator, proposal normals and accept uniform are drawn in the
 * same order in both phases, so trajectories are reproducible regardless of
 * when adaptation kicks in.
 */
template <class F>
step_outcome adaptive_rwm_step(F&& logf, const Eigen::VectorXd& y, double logf_y,
                               const sampler_params& prm, adaptive_walk_state& st,
                               rng_stream& rng) {
  const Eigen::Index d = y.size();
  if (st.moments.count() == 0) st.moments.add_batch(y.transpose());

  Eigen::MatrixXd wide;
  bool adaptive = st.moments.count() >= 2 * static_cast<std::int64_t>(d);
  if (adaptive) {
    Eigen::LLT<Eigen::MatrixXd> llt(st.moments.covariance());
    if (llt.info() == Eigen::Success) {
      wide = llt.matrixL();
      adaptive = wide.allFinite() && wide.diagonal().minCoeff() > 0.0;
    } else {
      adaptive = false;
    }
  }

  const double mix = rng.uniform01();
  Eigen::VectorXd z = rng.normal_vector(d);
  const double root_d = std::sqrt(static_cast<double>(d));
  Eigen::VectorXd cand;
  if (!adaptive || mix <= prm.beta) {
    cand = y + (0.1 / root_d) * z;
  } else {
    Eigen::VectorXd lz = wide.triangularView<Eigen::Lower>() * z;
    cand = y + (2.38 / root_d) * lz;
  }

  const double lf = logf(cand);
  const double u = rng.uniform01();
  step_outcome out;
  if (std::log(u) < lf - logf_y) {
    out.y = std::move(cand);
    out.logf_y = lf;
    out.accepted = true;
  } else {
    out.y = y;
    out.logf_y = logf_y;
    out.accepted = false;
  }
  st.moments.add_batch(out.y.transpose());
  return out;
}

/* Dispatch one transition of the configured kernel in its own coordinates. */
template <class F>
step_outcome base_step(const sampler_params& prm, F&& logf, const Eigen::VectorXd& y,
                       double logf_y, const kernel_frame& frame, rng_stream& rng,
                       adaptive_walk_state* adapt = nullptr) {
  switch (prm.kind) {
    case sampler_kind::gpss: return gpss_step(logf, y, logf_y, prm, rng);
    case sampler_kind::gp_ess: return gp_ess_step(logf, y, logf_y, frame, rng);
    case sampler_kind::hruss: return hruss_step(logf, y, logf_y, prm, rng);
    case sampler_kind::rwm: return rwm_step(logf, y, logf_y, prm, frame, rng);
    case sampler_kind::imh: return imh_step(logf, y, logf_y, prm, frame, rng);
    case sampler_kind::adarwm:
      if (adapt == nullptr) throw usage_error("adarwm requires per-chain adaptation state");
      return adaptive_rwm_step(logf, y, logf_y, prm, *adapt, rng);
  }
  throw usage_error("base_step: unknown sampler kind");
}

/* Sample-space result of one transform-conjugated transition. */
struct transition_result {
  Eigen::VectorXd x;
  double logd = 0.0;       // raw-target log-density at x
  std::uint64_t tde = 0;   // target-density evaluations consumed by this step
  bool accepted = true;
  bracket_stats stats;
};

/*
 * One transition of the kernel conjugated by alpha: pull the state to latent
 * coordinates, run the unit-frame kernel against rho(alpha(.)), push the
 * result back. Since rho_alpha(y) = rho(alpha(y)), the cached log-density of
 * the sample-space state stays valid across transform changes; pass NaN to
 * warm the cache with one extra evaluation.
 */
template <class Eval>
transition_result att_transition(Eval& eval, const affine_map& alpha, const sampler_params& prm,
                                 const Eigen::VectorXd& x, double logd_x, rng_stream& rng,
                                 adaptive_walk_state* adapt = nullptr) {
  const std::uint64_t before = eval.count();
  Eigen::VectorXd y = alpha.invert(x);
  auto logf = [&](const Eigen::VectorXd& yy) { return eval(alpha.apply(yy)); };
  const double logf_y = std::isnan(logd_x) ? logf(y) : logd_x;
  step_outcome out = base_step(prm, logf, y, logf_y, kernel_frame{}, rng, adapt);
  transition_result res;
  res.x = alpha.apply(out.y);
  res.logd = out.logf_y;
  res.tde = eval.count() - before;
  res.accepted = out.accepted;
  res.stats = out.stats;
  return res;
}

/*
 * Maximum trajectory deviation between a kernel run directly in frame (c, L)
 * and the same kernel conjugated through alpha(y) = L y + c around the unit
 * frame, both consuming one shared random stream layout. Supported for the
 * kernels that admit a frame: rwm, imh, gp-ess.
 */
inline double coupled_equivalence_max_dev(const log_density& target, sampler_kind kind,
                                          const Eigen::VectorXd& c, const Eigen::MatrixXd& L,
                                          double sigma, const Eigen::VectorXd& x0, int n_steps,
                                          std::uint64_t seed) {
  if (kind != sampler_kind::rwm && kind != sampler_kind::imh && kind != sampler_kind::gp_ess)
    throw usage_error("coupled_equivalence_max_dev: kernel has no location/scale frame");
  sampler_params prm = default_params(kind);
  prm.sigma = sigma;
  kernel_frame frame{&c, &L};
  affine_map alpha = affine_map::general(L, c);

  rng_stream rng_a(seed, 0), rng_b(seed, 0);
  density_eval eval_a(target), eval_b(target);
  Eigen::VectorXd xa = x0;
  double la = eval_a(xa);
  Eigen::VectorXd xb = x0;
  double lb = eval_b(xb);

  double max_dev = 0.0;
  for (int i = 0; i < n_steps; ++i) {
    step_outcome oa = base_step(prm, [&](const Eigen::VectorXd& v) { return eval_a(v); }, xa, la,
                                frame, rng_a, nullptr);
    xa = oa.y;
    la = oa.logf_y;
    transition_result ob = att_transition(eval_b, alpha, prm, xb, lb, rng_b, nullptr);
    xb = ob.x;
    lb = ob.logd;
    max_dev = std::max(max_dev, (xa - xb).lpNorm<Eigen::Infinity>());
  }
  return max_dev;
}

}  // namespace patt
