#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "patt/errors.hpp"
#include "patt/runner.hpp"
#include "patt/samplers.hpp"
#include "patt/schedule.hpp"
#include "patt/transform.hpp"

namespace patt {

using json = nlohmann::json;

/* Target description; `family` selects which fields apply. */
struct target_config {
  std::string family;          // gaussian | mv_exponential | mv_t |
                               // exp_measurement_posterior |
                               // logistic_regression | logistic_synthetic
  Eigen::Index dim = 0;        // elliptical families
  Eigen::VectorXd mean;        // empty: zero vector
  Eigen::MatrixXd covariance;  // canonical dense; empty: identity
  double dof = 10.0;           // mv_t
  int n_measurements = 100;    // exp_measurement_posterior
  std::uint64_t data_seed = 1; // synthetic data families
  std::string csv;             // logistic_regression
  std::string label;           // logistic_regression
  Eigen::Index n = 0;          // logistic_synthetic rows
  Eigen::Index d = 0;          // logistic_synthetic raw feature count
  bool normalize = true;       // logistic pipelines
  bool interactions = false;   // logistic pipelines
  double prior_variance = 100.0;
};

struct schedule_config {
  std::string kind = "default";  // default | none | linear | exponential |
                                 // every_iteration | explicit
  double a = 0.0;
  double b = 0.0;
  std::vector<std::int64_t> times;
};

struct sampler_config {
  std::string name;  // empty: derived from the kind
  sampler_kind kind = sampler_kind::gpss;
  double w = 3.0;
  double sigma = 1.0;
  double beta = 0.05;
  int max_step_out = 1000;
  centering_kind centering = centering_kind::none;
  scaling_kind scaling = scaling_kind::none;
  double epsilon = 0.0;
  schedule_config schedule;
  parallel_mode mode = parallel_mode::entangled;
  bool include_burn_in = false;
  double iterations_factor = 1.0;   // per-row multiplier on the run length
  std::int64_t burn_in = -1;        // per-row override; -1: inherit the experiment value
};

struct init_config {
  std::string kind = "gaussian";  // gaussian | point
  Eigen::VectorXd mean;           // empty: origin
  double sd = 1.0;
  Eigen::MatrixXd factor;         // optional lower-triangular scale
};

struct dump_config {
  bool samples = true;
  std::int64_t thin = 1;
};

struct experiment_config {
  std::uint64_t seed = 1;
  int chains = 10;
  std::int64_t iterations = 0;
  std::int64_t burn_in = -1;  // -1: iterations / 10
  int threads = 0;            // 0: one per chain
  double window_fraction = 0.5;
  std::optional<Eigen::VectorXd> abs_shift;
  dump_config dump;
  std::string out;  // output directory; empty lets the caller choose
  target_config target;
  init_config init;
  std::vector<sampler_config> samplers;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw usage_error("config: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw usage_error("config: unknown field '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw usage_error(std::string("config: field '") + key + "' has the wrong type");
  }
}

inline Eigen::VectorXd get_vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw usage_error("config: " + where + " must be an array of numbers");
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& e : j) {
    if (!e.is_number()) throw usage_error("config: " + where + " must contain only numbers");
    v(i++) = e.get<double>();
  }
  return v;
}

inline Eigen::MatrixXd get_matrix(const json& j, const std::string& where) {
  // Accepted forms: dense [[...],...], {"diag": [...]}, {"identity": n}.
  if (j.is_object()) {
    check_keys(j, {"diag", "identity"}, where);
    if (j.contains("diag")) {
      Eigen::VectorXd dg = get_vector(j.at("diag"), where + ".diag");
      return dg.asDiagonal();
    }
    if (j.contains("identity"))
      return Eigen::MatrixXd::Identity(j.at("identity").get<Eigen::Index>(),
                                       j.at("identity").get<Eigen::Index>());
    throw usage_error("config: " + where + " object needs 'diag' or 'identity'");
  }
  if (!j.is_array() || j.empty()) throw usage_error("config: " + where + " must be a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::VectorXd row = get_vector(j.at(static_cast<std::size_t>(i)), where + " row");
    if (i == 0) m.resize(rows, row.size());
    if (row.size() != m.cols()) throw usage_error("config: " + where + " rows differ in length");
    m.row(i) = row;
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

}  // namespace detail

inline centering_kind centering_from_name(const std::string& s) {
  if (s == "none") return centering_kind::none;
  if (s == "mean") return centering_kind::mean;
  if (s == "median") return centering_kind::median;
  throw usage_error("config: unknown centering '" + s + "'");
}

inline const char* centering_name(centering_kind c) {
  switch (c) {
    case centering_kind::none: return "none";
    case centering_kind::mean: return "mean";
    case centering_kind::median: return "median";
  }
  return "?";
}

inline scaling_kind scaling_from_name(const std::string& s) {
  if (s == "none") return scaling_kind::none;
  if (s == "variance") return scaling_kind::variance;
  if (s == "covariance") return scaling_kind::covariance;
  throw usage_error("config: unknown scaling '" + s + "'");
}

inline const char* scaling_name(scaling_kind s) {
  switch (s) {
    case scaling_kind::none: return "none";
    case scaling_kind::variance: return "variance";
    case scaling_kind::covariance: return "covariance";
  }
  return "?";
}

inline parallel_mode mode_from_name(const std::string& s) {
  if (s == "entangled") return parallel_mode::entangled;
  if (s == "independent") return parallel_mode::independent;
  throw usage_error("config: unknown parallelization mode '" + s + "'");
}

inline target_config parse_target_config(const json& j) {
  detail::check_keys(j,
                     {"family", "dim", "mean", "covariance", "dof", "n_measurements", "data_seed",
                      "csv", "label", "n", "d", "normalize", "interactions", "prior_variance"},
                     "target");
  target_config t;
  if (!j.contains("family")) throw usage_error("config: target needs a 'family'");
  t.family = j.at("family").get<std::string>();
  t.dim = detail::get_or<Eigen::Index>(j, "dim", 0);
  if (j.contains("mean")) t.mean = detail::get_vector(j.at("mean"), "target.mean");
  if (j.contains("covariance")) t.covariance = detail::get_matrix(j.at("covariance"), "target.covariance");
  t.dof = detail::get_or<double>(j, "dof", 10.0);
  t.n_measurements = detail::get_or<int>(j, "n_measurements", 100);
  t.data_seed = detail::get_or<std::uint64_t>(j, "data_seed", 1);
  t.csv = detail::get_or<std::string>(j, "csv", "");
  t.label = detail::get_or<std::string>(j, "label", "");
  t.n = detail::get_or<Eigen::Index>(j, "n", 0);
  t.d = detail::get_or<Eigen::Index>(j, "d", 0);
  t.normalize = detail::get_or<bool>(j, "normalize", true);
  t.interactions = detail::get_or<bool>(j, "interactions", false);
  t.prior_variance = detail::get_or<double>(j, "prior_variance", 100.0);

  const bool elliptical = t.family == "gaussian" || t.family == "mv_exponential" || t.family == "mv_t";
  if (elliptical) {
    if (t.mean.size() == 0 && t.dim == 0)
      throw usage_error("config: target '" + t.family + "' needs 'dim' or 'mean'");
    if (t.dim == 0) t.dim = t.mean.size();
    if (t.mean.size() != 0 && t.mean.size() != t.dim)
      throw usage_error("config: target mean length disagrees with dim");
    if (t.covariance.size() != 0 && (t.covariance.rows() != t.dim || t.covariance.cols() != t.dim))
      throw usage_error("config: target covariance shape disagrees with dim");
  } else if (t.family == "exp_measurement_posterior") {
    if (t.dim == 0) throw usage_error("config: target needs 'dim'");
    if (t.n_measurements < 1) throw usage_error("config: n_measurements must be positive");
  } else if (t.family == "logistic_regression") {
    if (t.csv.empty() || t.label.empty())
      throw usage_error("config: logistic_regression target needs 'csv' and 'label'");
  } else if (t.family == "logistic_synthetic") {
    if (t.n < 2 || t.d < 1) throw usage_error("config: logistic_synthetic target needs 'n' and 'd'");
  } else {
    throw usage_error("config: unknown target family '" + t.family + "'");
  }
  return t;
}

inline schedule_config parse_schedule_config(const json& j) {
  detail::check_keys(j, {"kind", "a", "b", "times"}, "schedule");
  schedule_config s;
  s.kind = detail::get_or<std::string>(j, "kind", "default");
  s.a = detail::get_or<double>(j, "a", 0.0);
  s.b = detail::get_or<double>(j, "b", 0.0);
  s.times = detail::get_or<std::vector<std::int64_t>>(j, "times", {});
  if (s.kind != "default" && s.kind != "none" && s.kind != "linear" && s.kind != "exponential" &&
      s.kind != "every_iteration" && s.kind != "explicit")
    throw usage_error("config: unknown schedule kind '" + s.kind + "'");
  if (s.kind == "linear" && !(s.a > 0.0))
    throw usage_error("config: linear schedule needs a positive 'a'");
  if (s.kind == "explicit" && s.times.empty())
    throw usage_error("config: explicit schedule needs 'times'");
  return s;
}

/* Resolve to a concrete schedule; nullopt means use the adjustment default. */
inline std::optional<update_schedule> resolve_schedule(const schedule_config& s) {
  if (s.kind == "default") return std::nullopt;
  if (s.kind == "none") return update_schedule::none();
  if (s.kind == "linear") return update_schedule::linear(s.a, s.b);
  if (s.kind == "exponential")
    return update_schedule::exponential(s.a > 1.0 ? s.a : 1.5, s.a > 1.0 ? s.b : 16.0);
  if (s.kind == "every_iteration") return update_schedule::every_iteration();
  return update_schedule::explicit_times(s.times);
}

inline sampler_config parse_sampler_config(const json& j) {
  detail::check_keys(j,
                     {"name", "kind", "w", "sigma", "beta", "max_step_out", "centering", "scaling",
                      "epsilon", "schedule", "mode", "include_burn_in", "iterations_factor",
                      "burn_in"},
                     "sampler");
  sampler_config s;
  s.name = detail::get_or<std::string>(j, "name", "");
  s.kind = sampler_kind_from_name(detail::get_or<std::string>(j, "kind", "gpss"));
  const sampler_params defaults = default_params(s.kind);
  s.w = detail::get_or<double>(j, "w", defaults.w);
  s.sigma = detail::get_or<double>(j, "sigma", defaults.sigma);
  s.beta = detail::get_or<double>(j, "beta", defaults.beta);
  s.max_step_out = detail::get_or<int>(j, "max_step_out", defaults.max_step_out);
  s.centering = centering_from_name(detail::get_or<std::string>(j, "centering", "none"));
  s.scaling = scaling_from_name(detail::get_or<std::string>(j, "scaling", "none"));
  s.epsilon = detail::get_or<double>(j, "epsilon", 0.0);
  if (j.contains("schedule")) s.schedule = parse_schedule_config(j.at("schedule"));
  s.mode = mode_from_name(detail::get_or<std::string>(j, "mode", "entangled"));
  s.include_burn_in = detail::get_or<bool>(j, "include_burn_in", false);
  s.iterations_factor = detail::get_or<double>(j, "iterations_factor", 1.0);
  s.burn_in = detail::get_or<std::int64_t>(j, "burn_in", -1);
  if (s.burn_in < -1) throw usage_error("config: sampler 'burn_in' must be >= 0 (or -1 to inherit)");
  if (!(s.w > 0.0)) throw usage_error("config: sampler 'w' must be positive");
  if (!(s.sigma > 0.0)) throw usage_error("config: sampler 'sigma' must be positive");
  if (s.beta < 0.0 || s.beta > 1.0) throw usage_error("config: sampler 'beta' must lie in [0, 1]");
  if (s.max_step_out < 1) throw usage_error("config: sampler 'max_step_out' must be positive");
  if (!(s.iterations_factor > 0.0))
    throw usage_error("config: sampler 'iterations_factor' must be positive");
  return s;
}

inline init_config parse_init_config(const json& j) {
  detail::check_keys(j, {"kind", "mean", "sd", "factor"}, "init");
  init_config c;
  c.kind = detail::get_or<std::string>(j, "kind", "gaussian");
  if (c.kind != "gaussian" && c.kind != "point")
    throw usage_error("config: unknown init kind '" + c.kind + "'");
  if (j.contains("mean")) c.mean = detail::get_vector(j.at("mean"), "init.mean");
  c.sd = detail::get_or<double>(j, "sd", 1.0);
  if (j.contains("factor")) c.factor = detail::get_matrix(j.at("factor"), "init.factor");
  if (!(c.sd > 0.0)) throw usage_error("config: init 'sd' must be positive");
  return c;
}

inline experiment_config parse_config(const json& j) {
  detail::check_keys(j,
                     {"seed", "chains", "iterations", "burn_in", "threads", "window_fraction",
                      "abs_shift", "dump", "out", "target", "init", "samplers"},
                     "experiment");
  experiment_config c;
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
  c.chains = detail::get_or<int>(j, "chains", 10);
  if (!j.contains("iterations")) throw usage_error("config: 'iterations' is required");
  c.iterations = j.at("iterations").get<std::int64_t>();
  c.burn_in = detail::get_or<std::int64_t>(j, "burn_in", -1);
  c.threads = detail::get_or<int>(j, "threads", 0);
  c.window_fraction = detail::get_or<double>(j, "window_fraction", 0.5);
  if (j.contains("abs_shift")) c.abs_shift = detail::get_vector(j.at("abs_shift"), "abs_shift");
  if (j.contains("dump")) {
    detail::check_keys(j.at("dump"), {"samples", "thin"}, "dump");
    c.dump.samples = detail::get_or<bool>(j.at("dump"), "samples", true);
    c.dump.thin = detail::get_or<std::int64_t>(j.at("dump"), "thin", 1);
    if (c.dump.thin < 1) throw usage_error("config: dump 'thin' must be positive");
  }
  c.out = detail::get_or<std::string>(j, "out", "");
  if (!j.contains("target")) throw usage_error("config: 'target' is required");
  c.target = parse_target_config(j.at("target"));
  if (j.contains("init")) c.init = parse_init_config(j.at("init"));
  if (!j.contains("samplers") || !j.at("samplers").is_array() || j.at("samplers").empty())
    throw usage_error("config: 'samplers' must be a non-empty array");
  for (const auto& s : j.at("samplers")) c.samplers.push_back(parse_sampler_config(s));

  if (c.chains < 1) throw usage_error("config: 'chains' must be positive");
  if (c.iterations < 1) throw usage_error("config: 'iterations' must be positive");
  if (c.burn_in < -1) throw usage_error("config: 'burn_in' must be >= 0 (or -1 for the default)");
  if (c.threads < 0) throw usage_error("config: 'threads' must be >= 0");
  if (!(c.window_fraction > 0.0) || c.window_fraction > 1.0)
    throw usage_error("config: 'window_fraction' must lie in (0, 1]");
  return c;
}

inline experiment_config parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw usage_error(std::string("config: invalid JSON: ") + e.what());
  }
  // A manifest embeds the config it ran under; accept it directly.
  if (j.is_object() && j.contains("config")) return parse_config(j.at("config"));
  return parse_config(j);
}

inline json emit_target_config(const target_config& t) {
  json j;
  j["family"] = t.family;
  if (t.family == "gaussian" || t.family == "mv_exponential" || t.family == "mv_t") {
    j["dim"] = t.dim;
    if (t.mean.size() != 0) j["mean"] = detail::vector_to_json(t.mean);
    if (t.covariance.size() != 0) j["covariance"] = detail::matrix_to_json(t.covariance);
    if (t.family == "mv_t") j["dof"] = t.dof;
  } else if (t.family == "exp_measurement_posterior") {
    j["dim"] = t.dim;
    j["n_measurements"] = t.n_measurements;
    j["data_seed"] = t.data_seed;
  } else if (t.family == "logistic_regression") {
    j["csv"] = t.csv;
    j["label"] = t.label;
    j["normalize"] = t.normalize;
    j["interactions"] = t.interactions;
    j["prior_variance"] = t.prior_variance;
  } else if (t.family == "logistic_synthetic") {
    j["n"] = t.n;
    j["d"] = t.d;
    j["data_seed"] = t.data_seed;
    j["normalize"] = t.normalize;
    j["interactions"] = t.interactions;
    j["prior_variance"] = t.prior_variance;
  }
  return j;
}

inline json emit_schedule_config(const schedule_config& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "linear" || s.kind == "exponential") {
    j["a"] = s.a;
    j["b"] = s.b;
  }
  if (s.kind == "explicit") j["times"] = s.times;
  return j;
}

inline json emit_sampler_config(const sampler_config& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["kind"] = sampler_kind_name(s.kind);
  j["w"] = s.w;
  j["sigma"] = s.sigma;
  j["beta"] = s.beta;
  j["max_step_out"] = s.max_step_out;
  j["centering"] = centering_name(s.centering);
  j["scaling"] = scaling_name(s.scaling);
  j["epsilon"] = s.epsilon;
  j["schedule"] = emit_schedule_config(s.schedule);
  j["mode"] = s.mode == parallel_mode::entangled ? "entangled" : "independent";
  j["include_burn_in"] = s.include_burn_in;
  j["iterations_factor"] = s.iterations_factor;
  j["burn_in"] = s.burn_in;
  return j;
}

inline json emit_config(const experiment_config& c) {
  json j;
  j["seed"] = c.seed;
  j["chains"] = c.chains;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["threads"] = c.threads;
  j["window_fraction"] = c.window_fraction;
  if (c.abs_shift) j["abs_shift"] = detail::vector_to_json(*c.abs_shift);
  j["dump"] = {{"samples", c.dump.samples}, {"thin", c.dump.thin}};
  if (!c.out.empty()) j["out"] = c.out;
  j["target"] = emit_target_config(c.target);
  json init;
  init["kind"] = c.init.kind;
  if (c.init.mean.size() != 0) init["mean"] = detail::vector_to_json(c.init.mean);
  init["sd"] = c.init.sd;
  if (c.init.factor.size() != 0) init["factor"] = detail::matrix_to_json(c.init.factor);
  j["init"] = init;
  j["samplers"] = json::array();
  for (const auto& s : c.samplers) j["samplers"].push_back(emit_sampler_config(s));
  return j;
}

}  // namespace patt
