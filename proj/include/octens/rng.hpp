#pragma once

#include <cstdint>
#include <random>

namespace octens {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation-defined, so the mappings from raw 64-bit
// words to reals and bounded integers are fixed here instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound); bound == 0 returns 0.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        // rejection keeps the draw unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace octens
