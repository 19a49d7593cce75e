#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace screener {

/// Worker count: SCREENER_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous blocks,
/// one per worker. Bodies must only write to per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Independent generator for sample `index` under run seed `seed`, so that
/// sampled results do not depend on how work is split across threads.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform draw in [0, 1) built from the top 53 bits; identical on every
/// standard library, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace screener
