#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sd {

using Rng = std::mt19937_64;

// 64-bit FNV-1a over a byte string.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Component sub-seed derivation: sub = splitmix64(root ^ fnv1a(name)).
// Stable across versions as long as component names are stable.
inline std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view component) {
    return splitmix64(root_seed ^ fnv1a(component));
}

inline Rng make_rng(std::uint64_t root_seed, std::string_view component) {
    return Rng(derive_seed(root_seed, component));
}

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi_inclusive) {
    return std::uniform_int_distribution<int>(lo, hi_inclusive)(rng);
}

}  // namespace sd
