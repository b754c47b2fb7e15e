#pragma once

#include <cstdint>
#include <random>

namespace vpmac {

/// Seeded random stream owned by one simulation run.
///
/// Uniform variates are built from the top 53 bits of mt19937_64 output so
/// that traces are identical across standard-library implementations
/// (std::uniform_real_distribution is not specified bit-for-bit).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).  n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Rejecting the 2^64 mod n lowest values keeps the draw unbiased.
        const std::uint64_t limit = -n % n;
        std::uint64_t x = engine_();
        while (x < limit) x = engine_();
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace vpmac
