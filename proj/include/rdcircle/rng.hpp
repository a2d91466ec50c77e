#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace rdcircle {

/// Deterministic random stream. Wraps mt19937_64 but derives doubles with
/// explicit bit manipulation so that the produced sequences are identical
/// across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (always consumes two uniforms).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    int uniform_int(int lo, int hi_inclusive) {
        return lo + static_cast<int>(uniform() * (hi_inclusive - lo + 1));
    }

    /// Independent child stream; distinct per index.
    RandomStream fork(std::uint64_t index) const {
        std::uint64_t x = base_seed_mix_ ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        // splitmix64 finalizer
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return RandomStream(x);
    }

    /// Records the seed used at construction so forks are reproducible.
    static RandomStream seeded(std::uint64_t seed) {
        RandomStream s(seed);
        s.base_seed_mix_ = seed * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL;
        return s;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t base_seed_mix_ = 0x9e3779b97f4a7c15ULL;
};

}  // namespace rdcircle
