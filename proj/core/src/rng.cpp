// SPDX-License-Identifier: Apache-2.0
#include "gennav/rng.hpp"

#include "gennav/error.hpp"

namespace gennav
{

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key)
{
    auto z = seed + 0x9e3779b97f4a7c15ULL * (key + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed): _seed(seed), _engine(mix_seed(seed, 0x5eed))
{
}

double Rng::uniform()
{
    // 53 random mantissa bits -> [0,1)
    return static_cast<double>(_engine() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev)
{
    if (stddev <= 0.0)
        return mean;
    auto dist = std::normal_distribution<double>(mean, stddev);
    return dist(_engine);
}

std::size_t Rng::categorical(std::span<const double> probs)
{
    if (probs.empty())
        throw Error("categorical draw over an empty distribution");
    auto const u = uniform();
    auto cumulative = 0.0;
    auto lastPositive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i)
    {
        if (probs[i] <= 0.0)
            continue;
        lastPositive = i;
        cumulative += probs[i];
        if (u < cumulative)
            return i;
    }
    if (lastPositive == probs.size())
        throw Error("categorical draw over an all-zero distribution");
    return lastPositive;
}

} // namespace gennav
