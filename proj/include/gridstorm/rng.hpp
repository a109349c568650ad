#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gridstorm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent, order-free substreams.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for the substream identified by (seed, tag, index).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                                  std::uint64_t index = 0) noexcept {
    return mix64(mix64(seed ^ hash_tag(tag)) + index);
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    return Rng{derive_seed(seed, tag, index)};
}

/// Uniform double in [lo, hi). Avoids std::uniform_real_distribution so
/// draws are identical across standard library implementations.
[[nodiscard]] inline double uniform(Rng& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

/// Uniform integer in [lo, hi].
[[nodiscard]] inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
}

/// Standard normal via Box-Muller (portable across standard libraries).
[[nodiscard]] double normal(Rng& rng, double mean, double sd);

}  // namespace gridstorm
