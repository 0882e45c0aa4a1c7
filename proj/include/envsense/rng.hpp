#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace envsense::rng {

// SplitMix64 step; used both as a seed mixer and to derive independent
// substream seeds so that parallel/reordered evaluation stays deterministic.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed for substream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(derive_seed(seed, stream));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection sampling over a power-of-two mask,
// so results do not depend on the standard library's distribution internals.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
        std::uint64_t v = g() & mask;
        if (v < n) return static_cast<std::size_t>(v);
    }
}

// Standard normal via Box-Muller (single value; no hidden spare state).
inline double gaussian(std::mt19937_64& g) {
    double u1 = 0.0;
    do {
        u1 = uniform01(g);
    } while (u1 <= 0.0);
    double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline double gaussian(std::mt19937_64& g, double mean, double sd) {
    return mean + sd * gaussian(g);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(g, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace envsense::rng
