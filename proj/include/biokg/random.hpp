#pragma once

// Portable sampling helpers. The standard <random> distributions are
// implementation-defined, so every draw that affects trained parameters goes
// through these to keep artifacts reproducible from a seed.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace biokg {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL)));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform in [0, n). n must be > 0. Rejection sampling keeps it unbiased.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n + 1) % n;
    std::uint64_t x = rng();
    while (x > limit)
        x = rng();
    return x % n;
}

inline bool coin_flip(Rng& rng) { return (rng() >> 63) != 0; }

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace biokg
