#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "patt/config.hpp"
#include "patt/errors.hpp"
#include "patt/targets.hpp"

namespace patt {

/*
 * Named benchmark setups. Each fully determines an experiment_config given a
 * seed; `scale` multiplies the iteration counts (1.0 = desk-scale default)
 * and `dim_override` replaces the default dimension where that is meaningful.
 */
inline std::vector<std::string> preset_names() {
  return {"ablation-adjustments", "ablation-parallel-us", "ablation-ibp", "mvexp-inference",
          "blr-synthetic"};
}

namespace detail {

inline std::int64_t scaled_its(double base, double scale) {
  const auto its = static_cast<std::int64_t>(std::llround(base * scale));
  if (its < 10) throw usage_error("preset: scale leaves fewer than 10 iterations");
  return its;
}

inline sampler_config preset_row(std::string name, sampler_kind kind, centering_kind cen,
                                 scaling_kind sca) {
  sampler_config s;
  s.name = std::move(name);
  s.kind = kind;
  sampler_params defaults = default_params(kind);
  s.w = defaults.w;
  s.sigma = defaults.sigma;
  s.beta = defaults.beta;
  s.max_step_out = defaults.max_step_out;
  s.centering = cen;
  s.scaling = sca;
  return s;
}

/* The four-row comparison used by the inference benchmarks. */
inline void add_inference_rows(experiment_config& cfg) {
  const std::int64_t burn =
      static_cast<std::int64_t>(std::llround(0.1 * static_cast<double>(cfg.iterations)));
  sampler_config gpss =
      preset_row("patt-gpss", sampler_kind::gpss, centering_kind::mean, scaling_kind::covariance);
  gpss.iterations_factor = 0.9;
  gpss.burn_in = burn;
  sampler_config ess =
      preset_row("patt-ess", sampler_kind::gp_ess, centering_kind::mean, scaling_kind::covariance);
  ess.iterations_factor = 0.9;
  ess.burn_in = burn;
  sampler_config hruss =
      preset_row("hruss", sampler_kind::hruss, centering_kind::none, scaling_kind::none);
  hruss.mode = parallel_mode::independent;
  hruss.burn_in = 0;
  sampler_config adarwm =
      preset_row("adarwm", sampler_kind::adarwm, centering_kind::none, scaling_kind::none);
  adarwm.mode = parallel_mode::independent;
  adarwm.iterations_factor = 5.0;
  adarwm.burn_in = 0;
  cfg.samplers = {gpss, ess, hruss, adarwm};
}

}  // namespace detail

/*
 * Adjustment-type ablation: heavy-tailed elliptical t target (10 degrees of
 * freedom) with strongly coupled, strongly inhomogeneous scale, mean far from
 * the origin, wide overdispersed initialization. Six slice-sampler rows cover
 * every reasonable adjustment subset.
 */
inline experiment_config preset_ablation_adjustments(double scale, std::uint64_t seed,
                                                     Eigen::Index dim) {
  if (dim <= 0) dim = 20;
  experiment_config cfg;
  cfg.seed = seed;
  cfg.chains = 10;
  cfg.iterations = detail::scaled_its(2e4, scale);
  cfg.burn_in = -1;  // iterations / 10
  cfg.window_fraction = 0.5;

  const double root_d = std::sqrt(static_cast<double>(dim));
  Eigen::VectorXd tau = Eigen::VectorXd::Constant(dim, root_d);
  Eigen::MatrixXd pi1 = Eigen::VectorXd::LinSpaced(dim, 1.0, static_cast<double>(dim))
                            .cwiseSqrt()
                            .asDiagonal();
  Eigen::MatrixXd pi2 = Eigen::MatrixXd::Constant(dim, dim, 0.5);
  pi2.diagonal().setOnes();
  cfg.target.family = "mv_t";
  cfg.target.dim = dim;
  cfg.target.mean = tau;
  cfg.target.covariance = pi1 * pi2 * pi1;
  cfg.target.dof = 10.0;

  cfg.init.kind = "gaussian";
  cfg.init.sd = static_cast<double>(dim);
  cfg.abs_shift = tau;

  cfg.samplers = {
      detail::preset_row("plain", sampler_kind::gpss, centering_kind::none, scaling_kind::none),
      detail::preset_row("cen", sampler_kind::gpss, centering_kind::mean, scaling_kind::none),
      detail::preset_row("var", sampler_kind::gpss, centering_kind::none, scaling_kind::variance),
      detail::preset_row("cov", sampler_kind::gpss, centering_kind::none, scaling_kind::covariance),
      detail::preset_row("cen+var", sampler_kind::gpss, centering_kind::mean,
                         scaling_kind::variance),
      detail::preset_row("cen+cov", sampler_kind::gpss, centering_kind::mean,
                         scaling_kind::covariance),
  };
  return cfg;
}

/*
 * Parallelization/update-schedule ablation: Gaussian with mean (1,...,d) and
 * per-coordinate scales 1..d, initialized with exact target draws so no
 * burn-in is needed. Rows cross {independent, entangled} with {update every
 * iteration, default schedule}.
 */
inline experiment_config preset_ablation_parallel_us(double scale, std::uint64_t seed,
                                                     Eigen::Index dim) {
  if (dim <= 0) dim = 30;
  experiment_config cfg;
  cfg.seed = seed;
  cfg.chains = 10;
  cfg.iterations = detail::scaled_its(2e4, scale);
  cfg.burn_in = 0;
  cfg.window_fraction = 1.0;

  Eigen::VectorXd tau = Eigen::VectorXd::LinSpaced(dim, 1.0, static_cast<double>(dim));
  Eigen::MatrixXd scales = tau.asDiagonal();
  cfg.target.family = "gaussian";
  cfg.target.dim = dim;
  cfg.target.mean = tau;
  cfg.target.covariance = scales * scales;

  cfg.init.kind = "gaussian";
  cfg.init.mean = tau;
  cfg.init.factor = scales;

  sampler_config np =
      detail::preset_row("np", sampler_kind::gpss, centering_kind::mean, scaling_kind::variance);
  np.mode = parallel_mode::independent;
  np.schedule.kind = "every_iteration";
  sampler_config np_us = np;
  np_us.name = "np+us";
  np_us.schedule.kind = "default";
  sampler_config ep = np;
  ep.name = "ep";
  ep.mode = parallel_mode::entangled;
  sampler_config ep_us = ep;
  ep_us.name = "ep+us";
  ep_us.schedule.kind = "default";
  cfg.samplers = {np, np_us, ep, ep_us};
  return cfg;
}

/*
 * Burn-in ablation: equicorrelated Gaussian whose mean has one huge
 * coordinate (2d) while chains start near the origin, so early samples
 * poison learned statistics unless a pre-adaptation phase discards them.
 * Both rows consume the same total iteration budget.
 */
inline experiment_config preset_ablation_ibp(double scale, std::uint64_t seed, Eigen::Index dim) {
  if (dim <= 0) dim = 30;
  experiment_config cfg;
  cfg.seed = seed;
  cfg.chains = 10;
  cfg.iterations = detail::scaled_its(2e4, scale);
  cfg.burn_in = 0;
  cfg.window_fraction = 0.5;

  Eigen::VectorXd tau = Eigen::VectorXd::Zero(dim);
  tau(0) = 2.0 * static_cast<double>(dim);
  Eigen::MatrixXd pi = Eigen::MatrixXd::Constant(dim, dim, 0.75);
  pi.diagonal().setOnes();
  cfg.target.family = "gaussian";
  cfg.target.dim = dim;
  cfg.target.mean = tau;
  cfg.target.covariance = pi;

  cfg.init.kind = "gaussian";
  cfg.abs_shift = Eigen::VectorXd::Zero(dim);

  sampler_config without = detail::preset_row("without-ibp", sampler_kind::gpss,
                                              centering_kind::mean, scaling_kind::covariance);
  without.burn_in = 0;
  sampler_config with = without;
  with.name = "with-ibp";
  with.burn_in =
      static_cast<std::int64_t>(std::llround(0.1 * static_cast<double>(cfg.iterations)));
  with.iterations_factor = 0.9;
  cfg.samplers = {without, with};
  return cfg;
}

/* Measurement-noise inference over elliptical exponential channels. */
inline experiment_config preset_mvexp_inference(double scale, std::uint64_t seed,
                                                Eigen::Index dim) {
  if (dim <= 0) dim = 10;
  experiment_config cfg;
  cfg.seed = seed;
  cfg.chains = 10;
  cfg.iterations = detail::scaled_its(1e4, scale);
  cfg.burn_in = 0;
  cfg.window_fraction = 0.5;

  cfg.target.family = "exp_measurement_posterior";
  cfg.target.dim = dim;
  cfg.target.n_measurements = 100;
  cfg.target.data_seed = seed;

  // The posterior concentrates near the data mean, far from the origin.
  exp_measurement_model model = make_exp_measurement_model(dim, cfg.target.n_measurements, seed);
  cfg.init.kind = "gaussian";
  cfg.init.mean = model.data_mean;

  detail::add_inference_rows(cfg);
  return cfg;
}

/* Logistic-regression posterior on synthetic data with engineered features. */
inline experiment_config preset_blr_synthetic(double scale, std::uint64_t seed, Eigen::Index dim) {
  if (dim <= 0) dim = 8;
  experiment_config cfg;
  cfg.seed = seed;
  cfg.chains = 10;
  cfg.iterations = detail::scaled_its(1e4, scale);
  cfg.burn_in = 0;
  cfg.window_fraction = 0.5;

  cfg.target.family = "logistic_synthetic";
  cfg.target.n = 500;
  cfg.target.d = dim;
  cfg.target.data_seed = seed;
  cfg.target.normalize = true;
  cfg.target.interactions = true;
  cfg.target.prior_variance = 100.0;

  detail::add_inference_rows(cfg);
  return cfg;
}

inline experiment_config preset_config(const std::string& name, double scale = 1.0,
                                       std::uint64_t seed = 1, Eigen::Index dim_override = 0) {
  if (!(scale > 0.0)) throw usage_error("preset: scale must be positive");
  if (name == "ablation-adjustments") return preset_ablation_adjustments(scale, seed, dim_override);
  if (name == "ablation-parallel-us") return preset_ablation_parallel_us(scale, seed, dim_override);
  if (name == "ablation-ibp") return preset_ablation_ibp(scale, seed, dim_override);
  if (name == "mvexp-inference") return preset_mvexp_inference(scale, seed, dim_override);
  if (name == "blr-synthetic") return preset_blr_synthetic(scale, seed, dim_override);
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw usage_error("preset: unknown name '" + name + "' (known: " + known + ")");
}

}  // namespace patt
