#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patt/config.hpp"
#include "patt/dataset.hpp"
#include "patt/errors.hpp"
#include "patt/report.hpp"
#include "patt/runner.hpp"
#include "patt/targets.hpp"

namespace patt {

namespace fs = std::filesystem;

struct built_target {
  log_density density;
  std::vector<std::string> notes;  // data-pipeline remarks worth surfacing
};

inline built_target build_target_from_config(const target_config& t) {
  built_target out;
  if (t.family == "gaussian" || t.family == "mv_exponential" || t.family == "mv_t") {
    Eigen::VectorXd mean = t.mean.size() != 0 ? t.mean : Eigen::VectorXd::Zero(t.dim);
    Eigen::MatrixXd cov =
        t.covariance.size() != 0 ? t.covariance : Eigen::MatrixXd::Identity(t.dim, t.dim);
    if (t.family == "gaussian")
      out.density = gaussian_target(std::move(mean), cov);
    else if (t.family == "mv_exponential")
      out.density = mv_exponential_target(std::move(mean), cov);
    else
      out.density = mv_t_target(t.dof, std::move(mean), cov);
    return out;
  }
  if (t.family == "exp_measurement_posterior") {
    out.density =
        exp_measurement_target(make_exp_measurement_model(t.dim, t.n_measurements, t.data_seed));
    return out;
  }
  if (t.family == "logistic_regression" || t.family == "logistic_synthetic") {
    dataset ds = t.family == "logistic_regression"
                     ? load_csv(t.csv, t.label)
                     : synthesize_logistic_data(t.n, t.d, t.data_seed);
    if (t.normalize) normalize_features(ds);
    if (t.interactions) add_interactions(ds);
    add_intercept(ds);
    out.notes = ds.notes;
    out.notes.push_back("regression dimension " + std::to_string(ds.X.cols()));
    out.density = logistic_regression_target(std::move(ds.X), std::move(ds.y), t.prior_variance);
    return out;
  }
  throw usage_error("config: unknown target family '" + t.family + "'");
}

inline init_spec resolve_init(const init_config& c, Eigen::Index dim) {
  init_spec spec;
  if (c.mean.size() != 0) {
    if (c.mean.size() != dim) throw usage_error("config: init mean dimension mismatch");
    spec.mean = c.mean;
  }
  spec.sd = c.sd;
  spec.point = c.kind == "point";
  if (c.factor.size() != 0) {
    if (c.factor.rows() != dim || c.factor.cols() != dim)
      throw usage_error("config: init factor dimension mismatch");
    spec.L = c.factor;
  }
  return spec;
}

namespace detail {

/* Shortest decimal form that round-trips a double through strtod. */
inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw io_error("failed writing '" + path.string() + "'");
}

inline json map_to_json(const affine_map& m, std::int64_t iteration, bool with_payload) {
  json j;
  j["iteration"] = iteration;
  switch (m.kind()) {
    case map_kind::identity: j["kind"] = "identity"; break;
    case map_kind::shift: j["kind"] = "shift"; break;
    case map_kind::diagonal: j["kind"] = "diagonal"; break;
    case map_kind::general: j["kind"] = "general"; break;
  }
  if (!with_payload) {
    j["payload_elided"] = true;
    return j;
  }
  if (m.kind() == map_kind::shift || m.kind() == map_kind::diagonal ||
      m.kind() == map_kind::general)
    j["center"] = vector_to_json(m.center());
  if (m.kind() == map_kind::diagonal) j["scales"] = vector_to_json(m.scales());
  if (m.kind() == map_kind::general) j["factor"] = matrix_to_json(m.factor());
  return j;
}

inline json stats_to_json(const sampler_stats& s) {
  json j;
  j["tde_per_it"] = s.tde_per_it;
  j["samples_per_s"] = s.samples_per_s;
  j["mean_iat"] = s.mean_iat;
  j["mss"] = s.mss;
  j["tde_per_es"] = s.tde_per_es;
  j["es_per_s"] = s.es_per_s;
  j["window_iterations"] = s.window_iterations;
  j["degenerate_marginals"] = s.degenerate_marginals;
  return j;
}

}  // namespace detail

inline std::string metrics_csv_text(const std::vector<sampler_stats>& rows) {
  std::string out = "sampler,tde_per_it,samples_per_s,mean_iat,mss,tde_per_es,es_per_s\n";
  for (const auto& s : rows) {
    out += s.name;
    for (double v : {s.tde_per_it, s.samples_per_s, s.mean_iat, s.mss, s.tde_per_es, s.es_per_s}) {
      out += ',';
      detail::append_double(out, v);
    }
    out += '\n';
  }
  return out;
}

inline std::string config_hash(const experiment_config& cfg) {
  return detail::hex64(detail::fnv1a64(emit_config(cfg).dump()));
}

struct experiment_row_result {
  std::string name;
  sampler_stats stats;
  // Full run record except chain states, which are released after dumping to
  // keep multi-row experiments within memory.
  run_report report;
};

struct experiment_result {
  std::vector<experiment_row_result> rows;
  std::vector<std::string> notes;
  int threads_used = 0;
  double wall_seconds = 0.0;
};

namespace detail {

/* Per-row iteration budget after the row multiplier. */
inline std::int64_t row_iterations(const experiment_config& cfg, const sampler_config& row) {
  const auto its = static_cast<std::int64_t>(
      std::llround(row.iterations_factor * static_cast<double>(cfg.iterations)));
  if (its < 1) throw usage_error("config: sampler '" + row.name + "' has no iterations left");
  return its;
}

inline std::string row_name(const sampler_config& row) {
  return row.name.empty() ? sampler_kind_name(row.kind) : row.name;
}

inline void dump_samples_csv(const fs::path& path, const run_report& rep, std::int64_t thin) {
  const auto n_total = rep.n_burn + rep.n_its;
  std::string text = "iteration,chain";
  for (Eigen::Index k = 0; k < rep.dim; ++k) text += ",x" + std::to_string(k + 1);
  text += '\n';
  text.reserve(static_cast<std::size_t>((n_total / thin + 2) * rep.p * (rep.dim + 2) * 20));
  for (std::int64_t it = 0; it <= n_total; ++it) {
    if (it % thin != 0) continue;
    for (int c = 0; c < rep.p; ++c) {
      text += std::to_string(it);
      text += ',';
      text += std::to_string(c);
      const auto& row = rep.chains[static_cast<std::size_t>(c)].states.row(it);
      for (Eigen::Index k = 0; k < rep.dim; ++k) {
        text += ',';
        append_double(text, row(k));
      }
      text += '\n';
    }
  }
  write_text_file(path, text);
}

inline void dump_costs_csv(const fs::path& path, const run_report& rep) {
  const auto n_total = rep.n_burn + rep.n_its;
  std::string text = "iteration,chain,tde,seconds\n";
  text.reserve(static_cast<std::size_t>(n_total * rep.p * 24));
  for (std::int64_t it = 1; it <= n_total; ++it) {
    for (int c = 0; c < rep.p; ++c) {
      const auto& tr = rep.chains[static_cast<std::size_t>(c)];
      text += std::to_string(it);
      text += ',';
      text += std::to_string(c);
      text += ',';
      text += std::to_string(tr.tde[static_cast<std::size_t>(it - 1)]);
      text += ',';
      append_double(text, tr.seconds[static_cast<std::size_t>(it - 1)]);
      text += '\n';
    }
  }
  write_text_file(path, text);
}

/* Histories beyond this many entries per row keep times but drop payloads. */
constexpr std::size_t k_transform_payload_cap = 20000;

inline json transforms_to_json(const run_report& rep, parallel_mode mode) {
  json j;
  if (mode == parallel_mode::entangled) {
    j["mode"] = "entangled";
    const bool payload = rep.transforms.size() <= k_transform_payload_cap;
    json hist = json::array();
    for (std::size_t k = 0; k < rep.transforms.size(); ++k) {
      const bool last = k + 1 == rep.transforms.size();
      hist.push_back(
          map_to_json(rep.transforms[k].map, rep.transforms[k].iteration, payload || last));
    }
    j["history"] = std::move(hist);
  } else {
    j["mode"] = "independent";
    std::size_t total = 0;
    for (const auto& tr : rep.chains) total += tr.transforms.size();
    const bool payload = total <= k_transform_payload_cap;
    json chains = json::array();
    for (const auto& tr : rep.chains) {
      json hist = json::array();
      for (std::size_t k = 0; k < tr.transforms.size(); ++k) {
        const bool last = k + 1 == tr.transforms.size();
        hist.push_back(
            map_to_json(tr.transforms[k].map, tr.transforms[k].iteration, payload || last));
      }
      chains.push_back(std::move(hist));
    }
    j["chains"] = std::move(chains);
  }
  return j;
}

inline json report_row_to_json(const experiment_row_result& row, parallel_mode mode) {
  const run_report& rep = row.report;
  json j;
  j["name"] = row.name;
  j["dim"] = rep.dim;
  j["chains"] = rep.p;
  j["iterations"] = rep.n_its;
  j["burn_in"] = rep.n_burn;
  j["mode"] = mode == parallel_mode::entangled ? "entangled" : "independent";
  j["wall_seconds"] = rep.wall_seconds;
  j["warnings"] = rep.warnings;
  j["stats"] = stats_to_json(row.stats);

  json evals = json::array(), accepts = json::array(), capped = json::array(),
       fallbacks = json::array(), waits = json::array();
  for (const auto& tr : rep.chains) {
    evals.push_back(tr.evals);
    accepts.push_back(tr.accepts);
    capped.push_back(tr.capped);
    fallbacks.push_back(tr.fallbacks);
    waits.push_back(tr.waits);
  }
  j["evals"] = std::move(evals);
  j["accepts"] = std::move(accepts);
  j["capped"] = std::move(capped);
  j["fallbacks"] = std::move(fallbacks);
  j["waits"] = std::move(waits);

  if (mode == parallel_mode::entangled) {
    j["update_times"] = rep.update_times;
    j["update_seconds"] = rep.update_seconds;
    j["final_transform"] = map_to_json(rep.final_transform(), 0, true);
  } else {
    json per_chain = json::array();
    for (const auto& tr : rep.chains) {
      json times = json::array();
      for (const auto& entry : tr.transforms) times.push_back(entry.iteration);
      per_chain.push_back(std::move(times));
    }
    j["chain_update_times"] = std::move(per_chain);
  }
  return j;
}

inline json manifest_json(const experiment_config& cfg, int threads_used,
                          const std::vector<std::string>& all_rows,
                          const std::vector<std::string>& completed,
                          const std::vector<std::string>& notes, bool complete) {
  json j;
  j["format_version"] = 1;
  j["seed"] = cfg.seed;
  j["threads"] = threads_used;
  j["config"] = emit_config(cfg);
  j["config_hash"] = config_hash(cfg);
  j["rows"] = all_rows;
  j["completed_rows"] = completed;
  j["notes"] = notes;
  j["status"] = complete ? "complete" : "partial";
  return j;
}

}  // namespace detail

/*
 * Run every sampler row of a config against its target. When out_dir is set,
 * writes metrics.csv, report.json, transforms.json, manifest.json plus
 * per-row <name>.samples.csv / <name>.costs.csv into it; the manifest stays
 * flagged "partial" until every row finished. thread_override >= 0 replaces
 * the config's thread count (0 = one thread per chain).
 */
inline experiment_result run_experiment(const experiment_config& cfg,
                                        const std::optional<fs::path>& out_dir,
                                        int thread_override = -1,
                                        const std::function<void(const std::string&)>& log = {}) {
  const auto t_start = detail::clock::now();
  built_target target = build_target_from_config(cfg.target);
  const Eigen::Index dim = target.density.dim();
  if (cfg.abs_shift && cfg.abs_shift->size() != dim)
    throw usage_error("config: abs_shift dimension disagrees with the target");
  init_spec init = resolve_init(cfg.init, dim);

  std::vector<std::string> row_names;
  for (const auto& row : cfg.samplers) {
    std::string name = detail::row_name(row);
    for (const auto& seen : row_names)
      if (seen == name) throw usage_error("config: duplicate sampler name '" + name + "'");
    row_names.push_back(std::move(name));
  }

  experiment_result result;
  result.notes = target.notes;
  result.threads_used = thread_override >= 0 ? thread_override : cfg.threads;

  json transforms_json;
  json report_rows = json::array();
  std::vector<std::string> completed;
  auto write_manifest = [&](bool complete) {
    if (!out_dir) return;
    detail::write_text_file(*out_dir / "manifest.json",
                            detail::manifest_json(cfg, result.threads_used, row_names, completed,
                                                  result.notes, complete)
                                    .dump(2) +
                                "\n");
  };
  if (out_dir) {
    std::error_code ec;
    fs::create_directories(*out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + out_dir->string() + "'");
    write_manifest(false);
  }

  for (std::size_t i = 0; i < cfg.samplers.size(); ++i) {
    const sampler_config& row = cfg.samplers[i];
    sampler_setup setup;
    setup.name = row_names[i];
    setup.params.kind = row.kind;
    setup.params.w = row.w;
    setup.params.sigma = row.sigma;
    setup.params.beta = row.beta;
    setup.params.max_step_out = row.max_step_out;
    setup.adjustments.centering = row.centering;
    setup.adjustments.scaling = row.scaling;
    setup.adjustments.epsilon = row.epsilon;
    setup.schedule = resolve_schedule(row.schedule);
    setup.mode = row.mode;
    setup.include_burnin_in_adaptation = row.include_burn_in;

    run_config rcfg;
    rcfg.p = cfg.chains;
    rcfg.n_its = detail::row_iterations(cfg, row);
    rcfg.n_burn = row.burn_in >= 0 ? row.burn_in : cfg.burn_in;
    rcfg.seed = cfg.seed;
    rcfg.threads = result.threads_used;
    rcfg.init = init;

    if (log)
      log("running " + setup.name + " (" + std::to_string(rcfg.n_its) + " iterations, " +
          std::to_string(cfg.chains) + " chains)");
    experiment_row_result rr;
    rr.name = setup.name;
    rr.report = run_sampler(target.density, setup, rcfg);

    stats_options opts;
    opts.window_frac = cfg.window_fraction;
    opts.abs_shift = cfg.abs_shift;
    rr.stats = compile_stats(rr.report, opts);
    rr.stats.name = rr.name;

    if (out_dir) {
      if (cfg.dump.samples)
        detail::dump_samples_csv(*out_dir / (rr.name + ".samples.csv"), rr.report, cfg.dump.thin);
      detail::dump_costs_csv(*out_dir / (rr.name + ".costs.csv"), rr.report);
      transforms_json[rr.name] = detail::transforms_to_json(rr.report, row.mode);
      report_rows.push_back(detail::report_row_to_json(rr, row.mode));
    }
    for (auto& tr : rr.report.chains) tr.states.resize(0, 0);
    if (log)
      log("  " + rr.name + ": mean IAT " + std::to_string(rr.stats.mean_iat) + ", wall " +
          std::to_string(rr.report.wall_seconds) + " s");
    result.rows.push_back(std::move(rr));
    completed.push_back(row_names[i]);
    if (out_dir) write_manifest(false);
  }

  result.wall_seconds = detail::seconds_between(t_start, detail::clock::now());
  if (out_dir) {
    std::vector<sampler_stats> stats;
    for (const auto& r : result.rows) stats.push_back(r.stats);
    detail::write_text_file(*out_dir / "metrics.csv", metrics_csv_text(stats));
    json report_json;
    report_json["rows"] = std::move(report_rows);
    report_json["wall_seconds"] = result.wall_seconds;
    detail::write_text_file(*out_dir / "report.json", report_json.dump(2) + "\n");
    detail::write_text_file(*out_dir / "transforms.json", transforms_json.dump() + "\n");
    write_manifest(true);
  }
  return result;
}

namespace detail {

inline json load_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw io_error("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

/* Numeric CSV with a header line; every data cell parsed as double. */
inline std::vector<std::vector<double>> load_numeric_csv(const fs::path& path,
                                                         std::size_t expect_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  if (!std::getline(in, line)) throw io_error("'" + path.string() + "' is empty");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(expect_cols);
    const char* s = line.c_str();
    char* end = nullptr;
    while (true) {
      double v = std::strtod(s, &end);
      if (end == s)
        throw io_error("'" + path.string() + "' line " + std::to_string(line_no) +
                       ": expected a number");
      row.push_back(v);
      s = end;
      if (*s == ',') {
        ++s;
        continue;
      }
      if (*s == '\r' || *s == '\0') break;
      throw io_error("'" + path.string() + "' line " + std::to_string(line_no) +
                     ": unexpected character");
    }
    if (row.size() != expect_cols)
      throw io_error("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                     std::to_string(expect_cols) + " fields");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/*
 * Recompute the metrics table of a finished run directory from its dumps.
 * Sample-quality columns come from <name>.samples.csv (thinned dumps give
 * thinned-series values; a note records that), cost columns from
 * <name>.costs.csv plus the recorded waits, windowed exactly like the
 * original run.
 */
inline std::vector<sampler_stats> recompute_run_dir(const fs::path& dir,
                                                    std::vector<std::string>* notes = nullptr) {
  const json manifest = detail::load_json_file(dir / "manifest.json");
  if (!manifest.contains("config")) throw io_error("manifest.json has no embedded config");
  const experiment_config cfg = parse_config(manifest.at("config"));
  if (manifest.value("status", "") != "complete" && notes != nullptr)
    notes->push_back("manifest status is '" + manifest.value("status", "?") + "'");
  const std::int64_t thin = cfg.dump.thin;
  if (thin > 1 && notes != nullptr)
    notes->push_back("dumps thinned by " + std::to_string(thin) +
                     ": autocorrelation and step sizes use the thinned series");

  const json report = detail::load_json_file(dir / "report.json");
  std::vector<sampler_stats> out;
  for (const json& row : report.at("rows")) {
    const std::string name = row.at("name").get<std::string>();
    const auto dim = row.at("dim").get<Eigen::Index>();
    const int p = row.at("chains").get<int>();
    const auto n_its = row.at("iterations").get<std::int64_t>();
    const auto n_burn = row.at("burn_in").get<std::int64_t>();
    const bool entangled = row.at("mode").get<std::string>() == "entangled";

    sampler_stats s;
    s.name = name;
    const std::int64_t w =
        std::clamp<std::int64_t>(std::llround(static_cast<double>(n_its) * cfg.window_fraction),
                                 1, n_its);
    s.window_iterations = w;
    const std::int64_t first_it = n_its - w + 1;

    // Cost and evaluation totals at full resolution.
    const auto costs = detail::load_numeric_csv(dir / (name + ".costs.csv"), 4);
    std::vector<double> chain_cost(static_cast<std::size_t>(p), 0.0);
    std::uint64_t total_tde = 0;
    for (const auto& r : costs) {
      const auto it = static_cast<std::int64_t>(r[0]) - n_burn;
      if (it < first_it) continue;
      const auto chain = static_cast<std::size_t>(r[1]);
      if (chain >= chain_cost.size()) throw io_error(name + ".costs.csv: chain out of range");
      total_tde += static_cast<std::uint64_t>(r[2]);
      chain_cost[chain] += r[3];
    }
    const json& waits = row.at("waits");
    for (int c = 0; c < p; ++c) {
      const json& wc = waits.at(static_cast<std::size_t>(c));
      if (entangled) {
        const json& times = row.at("update_times");
        for (std::size_t k = 0; k < times.size() && k < wc.size(); ++k)
          if (times.at(k).get<std::int64_t>() >= first_it)
            chain_cost[static_cast<std::size_t>(c)] += wc.at(k).get<double>();
      } else {
        const json& times = row.at("chain_update_times").at(static_cast<std::size_t>(c));
        for (std::size_t k = 0; k < times.size() && k < wc.size(); ++k)
          if (times.at(k).get<std::int64_t>() >= first_it)
            chain_cost[static_cast<std::size_t>(c)] += wc.at(k).get<double>();
      }
    }
    double mean_cost = 0.0;
    for (double c : chain_cost) mean_cost += c;
    mean_cost /= static_cast<double>(p);
    s.tde_per_it =
        static_cast<double>(total_tde) / static_cast<double>(w * static_cast<std::int64_t>(p));
    s.samples_per_s = mean_cost > 0.0 ? static_cast<double>(w) / mean_cost
                                      : std::numeric_limits<double>::quiet_NaN();

    // Sample-quality columns from the dumped states.
    if (cfg.dump.samples) {
      const auto samples =
          detail::load_numeric_csv(dir / (name + ".samples.csv"), static_cast<std::size_t>(dim) + 2);
      std::vector<std::vector<std::vector<double>>> kept(
          static_cast<std::size_t>(p), std::vector<std::vector<double>>());
      for (const auto& r : samples) {
        const auto it = static_cast<std::int64_t>(r[0]) - n_burn;
        if (it < first_it) continue;
        kept[static_cast<std::size_t>(r[1])].push_back(
            std::vector<double>(r.begin() + 2, r.end()));
      }
      std::vector<Eigen::MatrixXd> blocks;
      double mss_sum = 0.0;
      for (int c = 0; c < p; ++c) {
        const auto& rows_c = kept[static_cast<std::size_t>(c)];
        if (rows_c.empty()) throw io_error(name + ".samples.csv: no in-window rows");
        Eigen::MatrixXd block(static_cast<Eigen::Index>(rows_c.size()), dim);
        for (std::size_t r = 0; r < rows_c.size(); ++r)
          for (Eigen::Index k = 0; k < dim; ++k)
            block(static_cast<Eigen::Index>(r), k) = rows_c[r][static_cast<std::size_t>(k)];
        mss_sum += mean_step_size(block);
        if (cfg.abs_shift) block = (block.rowwise() - cfg.abs_shift->transpose()).cwiseAbs();
        blocks.push_back(std::move(block));
      }
      s.mss = mss_sum / static_cast<double>(p);
      s.mean_iat = mean_autocorr_time(blocks, &s.degenerate_marginals);
      s.tde_per_es = s.tde_per_it * s.mean_iat;
      s.es_per_s = s.samples_per_s / s.mean_iat;
    } else {
      s.mss = s.mean_iat = s.tde_per_es = s.es_per_s = std::numeric_limits<double>::quiet_NaN();
      if (notes != nullptr)
        notes->push_back(name + ": no sample dump, quality columns unavailable");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace patt
