#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace ibis {

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard; the std:: distributions are not, so every draw goes through the
// explicit transforms below. Generated artifacts are therefore byte-stable
// across compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; always consumes exactly two uniforms
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    // uniform integer in [0, n), rejection sampled so there is no modulo bias
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

// Stable sub-stream seeds: the same (base, name) pair always yields the same
// seed, independent of processing order or thread count.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a offset basis
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return detail::splitmix64(base ^ detail::splitmix64(h));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return detail::splitmix64(base ^ detail::splitmix64(index));
}

} // namespace ibis
