#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace windflex {

// SplitMix64 finalizer, used only to derive well-separated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// A seeded random stream with hand-rolled transforms. The engine
// (std::mt19937_64) is bit-exact by the standard; the distribution transforms
// in <random> are implementation-defined, so the library provides its own to
// keep every output reproducible across toolchains. Draw counts per call are
// fixed: uniform01 one engine step, exponential one, poisson k+1 for a count
// of k, normal exactly two.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Exponential with the given mean; maps u = 0 to exactly 0.
    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

    // Poisson by Knuth's product method; exact and portable for the small
    // intensities used here (well under one expected jump per step).
    int poisson(double intensity) {
        const double limit = std::exp(-intensity);
        int count = -1;
        double product = 1.0;
        do {
            ++count;
            product *= uniform01();
        } while (product > limit);
        return count;
    }

    // Gaussian by Box-Muller (cosine branch only, so the draw count per call
    // is constant).
    double normal(double mean, double stddev) {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log1p(-u1));
        return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 gen_;
};

// Stream tags keep the independent random inputs of one realization apart.
namespace stream_tag {
inline constexpr std::uint64_t wind = 0x57494E44ULL; // "WIND"
inline constexpr std::uint64_t temperature = 0x54454D50ULL; // "TEMP"
inline constexpr std::uint64_t fixtures = 0x46495854ULL; // "FIXT"
} // namespace stream_tag

// Derives the stream for (master_seed, realization, tag). Realization r uses
// a seed that depends on nothing else, so any parallel schedule that assigns
// realization indices identically reproduces identical draws.
inline RngStream make_stream(std::uint64_t master_seed, std::uint64_t realization,
                             std::uint64_t tag) {
    const std::uint64_t mixed = splitmix64(splitmix64(master_seed ^ splitmix64(realization)) ^ tag);
    return RngStream(mixed);
}

} // namespace windflex
