#pragma once

#include <cstdint>

namespace pincon {

/// Portable deterministic PRNG: SplitMix64.
///
/// Seeded graph generation, random impulse strengths and initial-state
/// fixtures are part of the external contract, so the generator and its
/// reduction rules are fixed here rather than delegated to the standard
/// library (whose distributions are implementation-defined):
///
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
///   z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31
///
///   uniform01()      = (next() >> 11) * 2^-53            in [0,1)
///   uniformIndex(m)  = next() % m                        in [0,m)
///   uniformReal(a,b) = a + uniform01() * (b - a)
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, m). Modulo reduction, by contract.
    std::uint64_t uniformIndex(std::uint64_t m) {
        return next() % m;
    }

    double uniformReal(double a, double b) {
        return a + uniform01() * (b - a);
    }

private:
    std::uint64_t state_;
};

} // namespace pincon
