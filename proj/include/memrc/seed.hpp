#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace memrc {

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed as a pure function of a parent seed and a path of indices.
///
/// derive_seed(root, {cell, trial}) never depends on how many other seeds were
/// drawn before, so work items can run in any order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                                  std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(parent);
    for (const auto idx : path) {
        h = mix64(h ^ mix64(idx + 0x632be59bd9b4e019ULL));
    }
    return h;
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits. Same result on every standard library,
/// unlike std::uniform_real_distribution.
[[nodiscard]] inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). Lemire-free modulo with rejection; portable across libraries.
[[nodiscard]] inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return static_cast<std::size_t>(r % bound);
}

}  // namespace memrc
