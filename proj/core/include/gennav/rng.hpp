// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gennav {

/// Deterministic seed derivation (splitmix64 finalizer over seed and key).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

/// Seeded random stream with hierarchical splitting.
///
/// `split(key)` derives a child stream from this stream's *seed*, not its state, so
/// children are independent of how many draws the parent has made. Episodes split
/// per turn and turns split per purpose (action, generator, reviewer); adding a turn
/// never perturbs the draws of earlier turns.
class Rng
{
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return _seed; }
    Rng split(std::uint64_t key) const { return Rng(mix_seed(_seed, key)); }

    std::uint64_t next_u64() { return _engine(); }
    double uniform();
    double normal(double mean, double stddev);

    /// Index drawn from `probs`; zero-probability entries are never returned.
    std::size_t categorical(std::span<const double> probs);

private:
    std::uint64_t _seed;
    std::mt19937_64 _engine;
};

} // namespace gennav
