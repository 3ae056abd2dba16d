#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace prn {

// splitmix64, used both as a seed scrambler and for counter-based
// seed derivation (one master seed, numbered streams).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive an independent sub-seed from a master seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Deterministic double-precision RNG. mt19937_64 is fully specified by the
// standard; the float conversions below avoid std::*_distribution so that
// streams are reproducible across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(scramble(seed)) {}

    std::uint64_t bits() { return eng_(); }

    /// Uniform on [0, 1), 53 bits of resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1].
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

    /// Standard normal via Box-Muller (no caching, one draw = two bits calls).
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer in [0, bound), bound >= 1. Rejection sampling, unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % bound;
    }

private:
    static std::uint64_t scramble(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }
    std::mt19937_64 eng_;
};

} // namespace prn
