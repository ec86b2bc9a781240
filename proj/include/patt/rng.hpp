#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace patt {

/*
 * Deterministic per-chain random stream.
 *
 * Each chain owns one stream derived from (master seed, stream id), so results
 * are independent of thread count and iteration interleaving. Draws are
 * hand-rolled on top of the raw 64-bit engine output instead of
 * std::*_distribution because the standard distributions keep hidden state
 * (e.g. the cached second Box-Muller variate), which would break trajectory
 * coupling and byte-level reproducibility.
 *
 * Consumption contract, relied on by the coupled-trajectory checks:
 *   - uniform01 / uniform: one engine word each,
 *   - normal: exactly two engine words,
 *   - normal_vector(d): exactly 2*d engine words,
 *   - uniform01 returns values in (0, 1], so log(u) is always finite.
 */
class rng_stream {
 public:
  rng_stream() : rng_stream(0, 0) {}

  rng_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    // SplitMix64 over (seed, id) decorrelates nearby seeds and stream ids.
    std::uint64_t s = master_seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
    std::seed_seq seq{split(s), split(s), split(s), split(s)};
    engine_.seed(seq);
  }

  // Uniform on (0, 1].
  double uniform01() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on (lo, hi]; requires lo < hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller, no caching: always two engine words.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = normal();
    return z;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  static std::uint64_t split(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace patt
