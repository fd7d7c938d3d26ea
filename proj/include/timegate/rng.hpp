#pragma once

#include <cmath>
#include <cstdint>

#include "timegate/errors.hpp"

namespace timegate {

// splitmix64; used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256++ with explicit draw algorithms so that simulated data is
// reproducible for a given seed independent of the standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    // Stream i of a master seed; streams for distinct i are independent
    // for all practical purposes.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(master_seed + 0x9e3779b97f4a7c15ull * (index + 1));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller, pairs cached.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        has_cached_normal_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Poisson by CDF inversion. Means are split into chunks <= 16 so the
    // running pmf term never underflows; Poisson(a+b) = Poisson(a)+Poisson(b).
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw InvalidArgument("poisson: mean must be >= 0");
        std::uint64_t total = 0;
        while (mean > 16.0) {
            total += poisson_small(16.0);
            mean -= 16.0;
        }
        return total + poisson_small(mean);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u >= cdf && k < 2000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    std::uint64_t state_[4];
    bool has_cached_normal_;
    double cached_normal_;
};

}  // namespace timegate
