#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace mqmspan {

/// Default seed when a run does not set one.
inline constexpr std::uint64_t kDefaultSeed = 20250101;

/// Seed of bootstrap replicate `index`, derived from the run seed only (SplitMix64).
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Unbiased draw from [0, n); n > 0. Portable across standard libraries.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Runs fn(0..n-1) on up to `jobs` threads. Results must be written to per-index slots.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mqmspan
