#pragma once

// Reproducible random streams. A master seed expands, through std::seed_seq
// (whose mixing is fixed by the standard), into independent engines keyed by
// (run index, purpose). Variates are produced by inverse-CDF transforms written
// here rather than by <random> distributions, whose algorithms are
// implementation-defined, so sequences are identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ecudn {

enum class StreamPurpose : std::uint32_t {
    Layout = 1,
    Fading = 2,
    Arrivals = 3,
    Sizes = 4,
    SinrReservoir = 5,
    Sampling = 6,
    Experiment = 7,
};

class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t index, StreamPurpose purpose) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32),
                          static_cast<std::uint32_t>(purpose)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

/// Derives a child seed for an indexed sub-task (sweep cell, layout draw, ...).
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    RandomStream s(master_seed, index, StreamPurpose::Experiment);
    return (static_cast<std::uint64_t>(s.below(1ull << 32)) << 32) | s.below(1ull << 32);
}

}  // namespace ecudn
