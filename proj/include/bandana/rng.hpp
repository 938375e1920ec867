#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bandana {

/// Seeded pseudo-random stream.
///
/// Wraps a 64-bit Mersenne Twister and implements the derived distributions
/// itself, so that a given seed yields the same sequence regardless of the
/// standard library in use. Streams for independent purposes (dropout,
/// mask sampling, negative sampling) are obtained with `derive`.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

    /// A new stream whose seed is a hash of (seed, name).
    static Rng derive(std::uint64_t seed, std::string_view name);
    /// Child stream of this one; does not advance the parent.
    Rng derive(std::string_view name) const { return derive(seed_, name); }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Standard normal via the Marsaglia polar method.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace bandana
