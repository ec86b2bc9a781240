#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "patt/config.hpp"
#include "patt/errors.hpp"
#include "patt/experiment.hpp"
#include "patt/presets.hpp"

namespace {

int thread_override_from_env() {
  const char* env = std::getenv("PATT_THREADS");
  if (env == nullptr || *env == '\0') return -1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0)
    throw patt::usage_error("PATT_THREADS must be a non-negative integer");
  return static_cast<int>(v);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw patt::io_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw patt::io_error("failed reading '" + path + "'");
  return buf.str();
}

void print_stats_table(const std::vector<patt::sampler_stats>& rows) {
  std::printf("%-16s %10s %12s %10s %10s %12s %12s\n", "sampler", "tde/it", "samples/s",
              "mean-iat", "mss", "tde/es", "es/s");
  for (const auto& s : rows)
    std::printf("%-16s %10.3f %12.1f %10.3f %10.3f %12.2f %12.2f\n", s.name.c_str(), s.tde_per_it,
                s.samples_per_s, s.mean_iat, s.mss, s.tde_per_es, s.es_per_s);
}

int resolve_threads(int cli_threads) {
  if (cli_threads >= 0) return cli_threads;
  return thread_override_from_env();  // -1 when unset: fall back to the config
}

void run_and_print(const patt::experiment_config& cfg, const std::string& out_dir,
                   int thread_override) {
  auto log = [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
  patt::experiment_result result =
      patt::run_experiment(cfg, std::filesystem::path(out_dir), thread_override, log);
  for (const auto& note : result.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
  std::vector<patt::sampler_stats> stats;
  for (const auto& r : result.rows) {
    for (const auto& w : r.report.warnings)
      std::fprintf(stderr, "warning (%s): %s\n", r.name.c_str(), w.c_str());
    stats.push_back(r.stats);
  }
  print_stats_table(stats);
  std::printf("outputs written to %s\n", out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive-transform MCMC benchmark harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name, run_dir;
  double scale = 1.0;
  std::uint64_t seed = 1;
  long long dim = 0;
  int threads = -1;
  bool emit_only = false;

  CLI::App* cmd_run = app.add_subcommand("run", "Run an experiment from a config file");
  cmd_run->add_option("config", config_path, "JSON config (or a manifest.json)")->required();
  cmd_run->add_option("--out", out_dir, "Output directory");
  cmd_run->add_option("--threads", threads, "Worker thread count (0 = one per chain)");

  CLI::App* cmd_preset = app.add_subcommand("preset", "Run a named benchmark preset");
  cmd_preset->add_option("name", preset_name, "One of the known preset names")->required();
  cmd_preset->add_option("--scale", scale, "Iteration-count multiplier");
  cmd_preset->add_option("--seed", seed, "Random seed");
  cmd_preset->add_option("--out", out_dir, "Output directory");
  cmd_preset->add_option("--dim", dim, "Override the preset dimension");
  cmd_preset->add_option("--threads", threads, "Worker thread count (0 = one per chain)");
  cmd_preset->add_flag("--emit-config", emit_only, "Print the config JSON and exit");

  CLI::App* cmd_report = app.add_subcommand("report", "Recompute diagnostics from a run directory");
  cmd_report->add_option("dir", run_dir, "Run directory with manifest and dumps")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_run->parsed()) {
      patt::experiment_config cfg = patt::parse_config_text(read_file(config_path));
      std::string dir = !out_dir.empty() ? out_dir
                        : !cfg.out.empty() ? cfg.out
                                           : "patt-run-" + patt::config_hash(cfg).substr(0, 8);
      run_and_print(cfg, dir, resolve_threads(threads));
    } else if (cmd_preset->parsed()) {
      patt::experiment_config cfg =
          patt::preset_config(preset_name, scale, seed, static_cast<Eigen::Index>(dim));
      if (emit_only) {
        std::printf("%s\n", patt::emit_config(cfg).dump(2).c_str());
        return 0;
      }
      std::string dir = !out_dir.empty() ? out_dir : "patt-" + preset_name;
      run_and_print(cfg, dir, resolve_threads(threads));
    } else if (cmd_report->parsed()) {
      std::vector<std::string> notes;
      std::vector<patt::sampler_stats> stats = patt::recompute_run_dir(run_dir, &notes);
      for (const auto& note : notes) std::fprintf(stderr, "note: %s\n", note.c_str());
      print_stats_table(stats);
    }
  } catch (const patt::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const patt::io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const patt::numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
