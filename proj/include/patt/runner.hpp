#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "patt/affine_map.hpp"
#include "patt/errors.hpp"
#include "patt/moments.hpp"
#include "patt/rng.hpp"
#include "patt/samplers.hpp"
#include "patt/schedule.hpp"
#include "patt/targets.hpp"
#include "patt/transform.hpp"

namespace patt {

/* How the chains of one run relate: one shared tuning loop, or per-chain. */
enum class parallel_mode { entangled, independent };

/* Initial state distribution; draws consume each chain's own stream. */
struct init_spec {
  Eigen::VectorXd mean;  // empty means the origin
  Eigen::MatrixXd L;     // optional lower-triangular factor; empty means sd * I
  double sd = 1.0;
  bool point = false;

  Eigen::VectorXd draw(Eigen::Index d, rng_stream& rng) const {
    Eigen::VectorXd m = mean.size() == 0 ? Eigen::VectorXd::Zero(d) : mean;
    if (m.size() != d) throw usage_error("init_spec: mean dimension mismatch");
    if (point) return m;
    Eigen::VectorXd z = rng.normal_vector(d);
    if (L.size() != 0) {
      if (L.rows() != d || L.cols() != d) throw usage_error("init_spec: factor dimension mismatch");
      return m + L.triangularView<Eigen::Lower>() * z;
    }
    return m + sd * z;
  }
};

struct sampler_setup {
  std::string name;
  sampler_params params;
  adjustment_config adjustments;
  std::optional<update_schedule> schedule;  // nullopt: default for the adjustments
  parallel_mode mode = parallel_mode::entangled;
  bool include_burnin_in_adaptation = false;
};

struct run_config {
  int p = 10;
  std::int64_t n_its = 0;
  std::int64_t n_burn = -1;  // -1: n_its / 10
  std::uint64_t seed = 1;
  int threads = 0;  // 0: one per chain; 1: fully sequential
  init_spec init;
  // Test/instrumentation hook, invoked before every transition with
  // (chain index, global row index). Must not touch chain streams.
  std::function<void(int, std::int64_t)> iteration_hook;
};

struct transform_log_entry {
  std::int64_t iteration = 0;  // tuning-loop iteration index of the rebuild
  affine_map map;
};

struct chain_trace {
  // Row r holds the state after r transitions; row 0 is the initial draw.
  // Rows 1..n_burn are burn-in, rows n_burn+1..n_burn+n_its the main phase.
  Eigen::MatrixXd states;
  std::vector<std::uint32_t> tde;    // per transition
  std::vector<double> seconds;       // per transition, compute time only
  std::vector<double> waits;         // per update event: blocked + update time
  std::vector<transform_log_entry> transforms;  // independent mode only
  std::uint64_t evals = 0;
  std::uint64_t capped = 0;
  std::uint64_t fallbacks = 0;
  std::uint64_t accepts = 0;
};

struct run_report {
  std::string sampler_name;
  std::vector<chain_trace> chains;
  std::vector<transform_log_entry> transforms;  // entangled mode
  std::vector<std::int64_t> update_times;       // realized schedule (entangled)
  std::vector<double> update_seconds;           // coordinator cost per update
  std::vector<std::string> warnings;
  std::int64_t n_burn = 0;
  std::int64_t n_its = 0;
  int p = 0;
  std::uint64_t seed = 0;
  Eigen::Index dim = 0;
  double wall_seconds = 0.0;

  std::int64_t window_rows(double frac) const {
    auto w = static_cast<std::int64_t>(std::llround(static_cast<double>(n_its) * frac));
    return std::clamp<std::int64_t>(w, 1, n_its);
  }

  // Last `window_rows(frac)` main-phase states of one chain.
  Eigen::Ref<const Eigen::MatrixXd> analysis_block(int chain, double frac) const {
    const std::int64_t w = window_rows(frac);
    return chains[static_cast<std::size_t>(chain)].states.middleRows(n_burn + n_its - w + 1, w);
  }

  const affine_map& final_transform() const {
    static const affine_map id;
    if (!transforms.empty()) return transforms.back().map;
    return id;
  }
};

namespace detail {

using clock = std::chrono::steady_clock;

inline double seconds_between(clock::time_point a, clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

struct chain_runtime {
  chain_runtime(const log_density& target, std::uint64_t seed, int index)
      : rng(seed, static_cast<std::uint64_t>(index)), eval(target) {}

  rng_stream rng;
  density_eval eval;
  Eigen::VectorXd x;
  double logd = std::numeric_limits<double>::quiet_NaN();
  std::optional<adaptive_walk_state> adapt;
  chain_trace trace;
};

/* Shared tuning state of one entangled run; mutated only between phases. */
struct tuning_state {
  adjustment_config cfg;
  std::optional<running_moments> moments;
  std::optional<median_buffer> medians;
  affine_map alpha;
  std::vector<transform_log_entry>* log = nullptr;
  std::vector<std::string>* warnings = nullptr;

  void init(Eigen::Index d, const adjustment_config& c) {
    cfg = c;
    alpha = affine_map::identity(d);
    if (cfg.needs_moments()) moments.emplace(d, cfg.needs_covariance());
    if (cfg.needs_median()) medians.emplace(d);
  }

  void absorb(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    if (moments) moments->add_batch(rows);
    if (medians) medians->add_batch(rows);
  }

  void rebuild(std::int64_t iteration) {
    alpha = build_transform(cfg, alpha.dim(), moments ? &*moments : nullptr,
                            medians ? &*medians : nullptr, warnings);
    if (log != nullptr) log->push_back({iteration, alpha});
  }
};

}  // namespace detail

/*
 * Run one sampler configuration: p chains, optional burn-in with the identity
 * transform, then the tuning loop over the realized update schedule. In
 * entangled mode all chains feed one accumulator and advance block-synchronous
 * between update times; in independent mode each chain owns its tuning loop
 * (schedule defaults use a chain count of 1) and never synchronizes.
 *
 * Chains own their random streams, so the generated states are identical for
 * any thread count, including the fully sequential path (threads = 1).
 */
inline run_report run_sampler(const log_density& target, const sampler_setup& setup,
                              const run_config& cfg) {
  const Eigen::Index d = target.dim();
  if (cfg.p < 1) throw usage_error("run_sampler: chain count must be positive");
  if (cfg.n_its < 1) throw usage_error("run_sampler: iteration count must be positive");
  const std::int64_t n_burn = cfg.n_burn >= 0 ? cfg.n_burn : cfg.n_its / 10;
  const std::int64_t n_total = n_burn + cfg.n_its;
  const int p = cfg.p;
  const int threads = cfg.threads == 0 ? p : std::clamp(cfg.threads, 1, p);

  run_report report;
  report.sampler_name = setup.name.empty() ? sampler_kind_name(setup.params.kind) : setup.name;
  report.n_burn = n_burn;
  report.n_its = cfg.n_its;
  report.p = p;
  report.seed = cfg.seed;
  report.dim = d;

  const bool tuned = setup.adjustments.any();
  const int p_eff = setup.mode == parallel_mode::entangled ? p : 1;
  const update_schedule sched =
      setup.schedule ? *setup.schedule
                     : update_schedule::default_for(setup.adjustments, d, p_eff);
  const std::vector<std::int64_t> times = tuned ? sched.realize(cfg.n_its) : std::vector<std::int64_t>{};

  // Chain setup is sequential and deterministic: stream c draws its own init.
  std::vector<detail::chain_runtime> chains;
  chains.reserve(static_cast<std::size_t>(p));
  for (int c = 0; c < p; ++c) {
    chains.emplace_back(target, cfg.seed, c);
    auto& cr = chains.back();
    cr.x = cfg.init.draw(d, cr.rng);
    if (setup.params.kind == sampler_kind::adarwm) cr.adapt.emplace(d);
    cr.trace.states.resize(n_total + 1, d);
    cr.trace.states.row(0) = cr.x;
    cr.trace.tde.assign(static_cast<std::size_t>(n_total), 0);
    cr.trace.seconds.assign(static_cast<std::size_t>(n_total), 0.0);
  }

  // One transition; returns compute seconds and records into the trace.
  auto advance = [&](detail::chain_runtime& cr, int chain_index, std::int64_t row,
                     const affine_map& alpha) {
    if (cfg.iteration_hook) cfg.iteration_hook(chain_index, row);
    const auto t0 = detail::clock::now();
    transition_result res = att_transition(cr.eval, alpha, setup.params, cr.x, cr.logd, cr.rng,
                                           cr.adapt ? &*cr.adapt : nullptr);
    const auto t1 = detail::clock::now();
    cr.x = std::move(res.x);
    cr.logd = res.logd;
    cr.trace.states.row(row) = cr.x;
    cr.trace.tde[static_cast<std::size_t>(row - 1)] = static_cast<std::uint32_t>(res.tde);
    cr.trace.seconds[static_cast<std::size_t>(row - 1)] = detail::seconds_between(t0, t1);
    cr.trace.capped += res.stats.capped;
    cr.trace.fallbacks += res.stats.fallbacks;
    cr.trace.accepts += res.accepted ? 1u : 0u;
  };

  const auto run_start = detail::clock::now();

  if (setup.mode == parallel_mode::entangled) {
    detail::tuning_state tuning;
    tuning.init(d, setup.adjustments);
    tuning.log = &report.transforms;
    tuning.warnings = &report.warnings;
    report.update_times = times;
    report.update_seconds.assign(times.size(), 0.0);
    for (auto& cr : chains) cr.trace.waits.assign(times.size(), 0.0);

    // Phase k covers main-loop iterations [starts[k], starts[k+1]); phase 0
    // additionally runs the burn-in rows. A rebuild happens between phases.
    std::vector<std::int64_t> starts;
    starts.push_back(1);
    for (std::int64_t t : times) starts.push_back(t);
    starts.push_back(cfg.n_its + 1);
    const std::size_t n_phases = starts.size() - 1;

    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto record_error = [&](std::exception_ptr e) {
      std::lock_guard<std::mutex> lk(error_mutex);
      if (!first_error) first_error = e;
      abort.store(true, std::memory_order_release);
    };

    std::size_t update_index = 0;
    auto do_update = [&]() noexcept {
      if (abort.load(std::memory_order_acquire)) return;
      try {
        const auto t0 = detail::clock::now();
        const std::int64_t t_now = times[update_index];
        const std::int64_t lo_prev = update_index == 0 ? 0 : times[update_index - 1];
        for (auto& cr : chains) {
          if (update_index == 0 && setup.include_burnin_in_adaptation && n_burn > 0)
            tuning.absorb(cr.trace.states.middleRows(0, n_burn));
          // Rows n_burn + lo_prev .. n_burn + t_now - 1: states 0..t_now-1 of
          // the tuning loop, where state 0 is the last pre-loop state.
          tuning.absorb(cr.trace.states.middleRows(n_burn + lo_prev, t_now - lo_prev));
        }
        tuning.rebuild(t_now);
        report.update_seconds[update_index] = detail::seconds_between(t0, detail::clock::now());
        ++update_index;
      } catch (...) {
        record_error(std::current_exception());
      }
    };

    auto worker_loop = [&](int worker, int n_workers, auto&& at_barrier) {
      for (std::size_t phase = 0; phase < n_phases; ++phase) {
        if (!abort.load(std::memory_order_acquire)) {
          for (int c = worker; c < p; c += n_workers) {
            auto& cr = chains[static_cast<std::size_t>(c)];
            const std::int64_t row_lo = (phase == 0 ? 1 : n_burn + starts[phase]);
            const std::int64_t row_hi = n_burn + starts[phase + 1] - 1;
            for (std::int64_t row = row_lo; row <= row_hi; ++row)
              advance(cr, c, row, tuning.alpha);
          }
        }
        if (phase + 1 < n_phases) {
          const auto t_arrive = detail::clock::now();
          at_barrier();
          const double wait = detail::seconds_between(t_arrive, detail::clock::now());
          for (int c = worker; c < p; c += n_workers)
            chains[static_cast<std::size_t>(c)].trace.waits[phase] = wait;
        }
      }
    };

    if (threads == 1) {
      for (std::size_t phase = 0; phase < n_phases; ++phase) {
        for (int c = 0; c < p; ++c) {
          auto& cr = chains[static_cast<std::size_t>(c)];
          const std::int64_t row_lo = (phase == 0 ? 1 : n_burn + starts[phase]);
          const std::int64_t row_hi = n_burn + starts[phase + 1] - 1;
          for (std::int64_t row = row_lo; row <= row_hi; ++row) advance(cr, c, row, tuning.alpha);
        }
        if (phase + 1 < n_phases) {
          do_update();
          // Sequentially the only blocked time is the update itself.
          for (auto& cr : chains) cr.trace.waits[phase] = report.update_seconds[phase];
        }
        if (abort.load(std::memory_order_acquire)) break;
      }
    } else {
      std::barrier sync(threads, [&]() noexcept { do_update(); });
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int wkr = 0; wkr < threads; ++wkr) {
        pool.emplace_back([&, wkr]() {
          try {
            worker_loop(wkr, threads, [&] { sync.arrive_and_wait(); });
          } catch (...) {
            record_error(std::current_exception());
            sync.arrive_and_drop();
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    // Independent mode: every chain runs its own tuning loop to completion.
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto run_chain = [&](int c) {
      auto& cr = chains[static_cast<std::size_t>(c)];
      detail::tuning_state tuning;
      tuning.init(d, setup.adjustments);
      tuning.log = &cr.trace.transforms;
      tuning.warnings = nullptr;  // per-chain rebuild warnings are not collected
      cr.trace.waits.assign(times.size(), 0.0);
      std::size_t next_update = 0;
      for (std::int64_t row = 1; row <= n_total; ++row) {
        if (abort.load(std::memory_order_acquire)) return;
        advance(cr, c, row, tuning.alpha);
        const std::int64_t it = row - n_burn;  // tuning-loop iteration index
        if (tuned && next_update < times.size() && it == times[next_update]) {
          const auto t0 = detail::clock::now();
          const std::int64_t lo_prev = next_update == 0 ? 0 : times[next_update - 1];
          if (next_update == 0 && setup.include_burnin_in_adaptation && n_burn > 0)
            tuning.absorb(cr.trace.states.middleRows(0, n_burn));
          tuning.absorb(cr.trace.states.middleRows(n_burn + lo_prev, it - lo_prev));
          tuning.rebuild(it);
          cr.trace.waits[next_update] = detail::seconds_between(t0, detail::clock::now());
          ++next_update;
        }
      }
    };

    if (threads == 1) {
      for (int c = 0; c < p; ++c) run_chain(c);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(threads));
      for (int wkr = 0; wkr < threads; ++wkr) {
        pool.emplace_back([&, wkr]() {
          try {
            for (int c = wkr; c < p; c += threads) run_chain(c);
          } catch (...) {
            std::lock_guard<std::mutex> lk(error_mutex);
            if (!first_error) first_error = std::current_exception();
            abort.store(true, std::memory_order_release);
          }
        });
      }
      for (auto& t : pool) t.join();
      if (first_error) std::rethrow_exception(first_error);
    }
  }

  report.wall_seconds = detail::seconds_between(run_start, detail::clock::now());
  for (auto& cr : chains) {
    cr.trace.evals = cr.eval.count();
    report.chains.push_back(std::move(cr.trace));
  }
  return report;
}

}  // namespace patt
