#pragma once

#include <cstdint>
#include <random>

namespace relup {

/// The generator used everywhere. Callers own their instance; nothing in the
/// library keeps a global one.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the `index`-th work item of a run keyed by `master`.
///
/// seed = mix64(mix64(master) + golden * (index + 1)). Two masters only share
/// a seed when their mixed values differ by a multiple of the golden gamma
/// smaller than the index range, which does not happen for practical ranges.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(mix64(master) + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace relup
