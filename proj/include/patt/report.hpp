#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "patt/diagnostics.hpp"
#include "patt/runner.hpp"

namespace patt {

/* Options controlling which samples feed the summary statistics. */
struct stats_options {
  double window_frac = 0.5;  // trailing fraction of the main phase analyzed
  // When set, autocorrelation times are computed on |x - shift| per
  // coordinate instead of the raw marginals (step sizes stay raw).
  std::optional<Eigen::VectorXd> abs_shift;
};

/*
 * Summary row of one run. The last two columns are identities by
 * construction: tde_per_es = tde_per_it * mean_iat, es_per_s =
 * samples_per_s / mean_iat.
 */
struct sampler_stats {
  std::string name;
  double tde_per_it = 0.0;
  double samples_per_s = 0.0;
  double mean_iat = 0.0;
  double mss = 0.0;
  double tde_per_es = 0.0;
  double es_per_s = 0.0;
  std::int64_t window_iterations = 0;
  int degenerate_marginals = 0;
};

/*
 * Compile the summary of one run over its analysis window. Per-chain cost is
 * the sum of in-window transition times plus the waits of in-window update
 * events; samples per second divide the window length by the chain-averaged
 * cost.
 */
inline sampler_stats compile_stats(const run_report& report, const stats_options& opts = {}) {
  sampler_stats out;
  out.name = report.sampler_name;
  const std::int64_t w = report.window_rows(opts.window_frac);
  out.window_iterations = w;
  const std::int64_t first_it = report.n_its - w + 1;  // first in-window main iteration

  double total_cost = 0.0;
  std::uint64_t total_tde = 0;
  double mss_sum = 0.0;
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(report.chains.size());
  for (int c = 0; c < report.p; ++c) {
    const chain_trace& tr = report.chains[static_cast<std::size_t>(c)];
    double cost = 0.0;
    for (std::int64_t it = first_it; it <= report.n_its; ++it) {
      const auto idx = static_cast<std::size_t>(report.n_burn + it - 1);
      cost += tr.seconds[idx];
      total_tde += tr.tde[idx];
    }
    if (report.update_times.empty()) {
      // Independent mode keeps its realized schedule in the per-chain log.
      for (std::size_t k = 0; k < tr.transforms.size() && k < tr.waits.size(); ++k)
        if (tr.transforms[k].iteration >= first_it) cost += tr.waits[k];
    } else {
      for (std::size_t k = 0; k < report.update_times.size(); ++k)
        if (report.update_times[k] >= first_it) cost += tr.waits[k];
    }
    total_cost += cost;

    Eigen::MatrixXd block = report.analysis_block(c, opts.window_frac);
    mss_sum += mean_step_size(block);
    if (opts.abs_shift) {
      if (opts.abs_shift->size() != report.dim)
        throw usage_error("compile_stats: shift dimension mismatch");
      block = (block.rowwise() - opts.abs_shift->transpose()).cwiseAbs();
    }
    blocks.push_back(std::move(block));
  }

  const double mean_cost = total_cost / static_cast<double>(report.p);
  out.tde_per_it = static_cast<double>(total_tde) /
                   static_cast<double>(w * static_cast<std::int64_t>(report.p));
  out.samples_per_s = mean_cost > 0.0 ? static_cast<double>(w) / mean_cost
                                      : std::numeric_limits<double>::quiet_NaN();
  out.mean_iat = mean_autocorr_time(blocks, &out.degenerate_marginals);
  out.mss = mss_sum / static_cast<double>(report.p);
  out.tde_per_es = out.tde_per_it * out.mean_iat;
  out.es_per_s = out.samples_per_s / out.mean_iat;
  return out;
}

}  // namespace patt
