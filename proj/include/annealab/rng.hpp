// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace annealab {

/// Counter-based deterministic random streams. Every draw is addressed by
/// (seed, step, index, stream), so parallel runs reproduce bit-identically
/// regardless of scheduling and no generator state is carried around.
namespace rng {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t step, std::uint64_t index,
                                  std::uint64_t stream) {
    std::uint64_t h = mix64(seed ^ 0x1234567890abcdefull);
    h = mix64(h ^ step);
    h = mix64(h ^ (index * 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ (stream * 0xda942042e4dd58b5ull));
    return h;
}

/// Uniform in (0, 1): top 53 bits, offset by half an ulp so log() is safe.
inline double uniform01(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller on two derived streams.
inline double gaussian(std::uint64_t seed, std::uint64_t step, std::uint64_t index) {
    const double u1 = uniform01(counter_hash(seed, step, index, 0));
    const double u2 = uniform01(counter_hash(seed, step, index, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace rng

} // namespace annealab
