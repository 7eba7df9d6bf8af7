// rng.hpp — deterministic counter-based random streams
//
// Every stochastic routine in the library draws from a RandomStream obtained
// via substream(seed, index). Streams for distinct indices are statistically
// independent, so per-sample work can be distributed over threads while the
// produced numbers stay identical for any worker count.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace psim {

namespace detail {
// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {
        // burn-in decorrelates trivially related seeds
        detail::splitmix64(state_);
        detail::splitmix64(state_);
    }

    static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t s = seed;
        std::uint64_t a = detail::splitmix64(s);
        return RandomStream(a ^ (index * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
    }

    std::uint64_t next_u64() { return detail::splitmix64(state_); }

    // uniform in [0, 1), 53 bits of mantissa
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    std::complex<double> gaussian_complex() {
        const double re = gaussian();
        const double im = gaussian();
        return {re, im};
    }

    // uniform phase on the unit circle
    std::complex<double> unit_phase() {
        const double a = 6.283185307179586476925286766559 * uniform();
        return {std::cos(a), std::sin(a)};
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace psim
