#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace emrc {

/// Seeded generator with hand-rolled distributions so that sampled streams
/// are reproducible independently of the standard library's distribution
/// implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        return static_cast<int>(eng_() % static_cast<uint64_t>(n));
    }

    /// Standard normal via Box-Muller (no cached second sample).
    double normal() {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Poisson sample: Knuth's method for small means, normal approximation
    /// (rounded, clamped at zero) for large ones.
    long poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            const double limit = std::exp(-lambda);
            double p = 1.0;
            long k = 0;
            do {
                ++k;
                p *= uniform();
            } while (p > limit);
            return k - 1;
        }
        const double v = lambda + std::sqrt(lambda) * normal();
        return v < 0.0 ? 0 : static_cast<long>(std::llround(v));
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace emrc
