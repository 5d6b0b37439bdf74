#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace iwfsim {

// SplitMix64 (Steele/Lea/Flood). Chosen as the project PRNG because the whole
// algorithm fits in six lines and is trivial to reimplement bit-for-bit in
// another language; docs/file-formats.md pins the constants and the derived
// variate formulas used below.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1): (k + 0.5) * 2^-53 with k the top
    // 53 bits. Never returns 0 or 1, so log() of it is always finite.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Exponential with the given mean, by inversion. Strictly positive.
    double exponential(double mean) { return -mean * std::log(1.0 - uniform01()); }

    // Pair of independent standard normals (Box-Muller, polar form with
    // explicit cos/sin so the draw count per call is exactly two uniforms).
    std::pair<double, double> normal_pair() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    // Derive an independent stream for (seed, index) without perturbing this
    // generator; used to give each Monte Carlo replicate its own stream.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return SplitMix64(mix.next_u64());
    }

private:
    std::uint64_t state_;
};

}  // namespace iwfsim
