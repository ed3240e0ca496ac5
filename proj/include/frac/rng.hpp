#pragma once

#include <cstdint>
#include <random>

#include "frac/common.hpp"

namespace frac {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Independent stream for (master seed, experiment tag, trial index).
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s) ^ tag;
    s = a;
    const std::uint64_t b = splitmix64(s) ^ index;
    s = b;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
    return std::mt19937_64(seq);
}

// Circular complex Gaussian with E|z|^2 = variance.
inline cd complex_normal(std::mt19937_64& rng, double variance) {
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

}  // namespace frac
