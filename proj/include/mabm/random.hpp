#pragma once

#include <cstdint>
#include <random>

namespace mabm {

/// Seeded random source threaded through every stochastic operation.
///
/// Each simulation owns exactly one instance; nothing here is shared, so
/// independent runs can proceed on separate threads.
class Random {
public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    /// Standard normal variate.
    double normal() { return normal_(engine_); }

    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    /// Uniform real on [lo, hi).
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Derives the seed of an independent stream from a master seed.
///
/// Splitting rule: splitmix64(master + (stream + 1) * 0x9E3779B97F4A7C15).
/// Stream 0 is reserved for the main simulation; sweeps use the cell index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace mabm
