// SPDX-License-Identifier: Apache-2.0
#include "gennav/reward.hpp"
#include "gennav/rng.hpp"

#include <benchmark/benchmark.h>

using namespace gennav;

static void BM_PreGrpoReward(benchmark::State& state)
{
    auto const w = reward::RewardWeights {};
    auto const scores = std::vector {3.0, 4.8, 4.0};
    for (auto _: state)
        benchmark::DoNotOptimize(reward::pre_grpo_reward(reward::compute_stats(scores, true, w), w));
}
BENCHMARK(BM_PreGrpoReward);

static void BM_GroupAdvantages(benchmark::State& state)
{
    auto rng = Rng(1);
    auto rewards = std::vector<double>(static_cast<std::size_t>(state.range(0)));
    for (auto& r: rewards)
        r = rng.normal(1.0, 0.3);
    for (auto _: state)
        benchmark::DoNotOptimize(reward::group_advantages(rewards, 1e-8));
}
BENCHMARK(BM_GroupAdvantages)->Arg(8)->Arg(64);
