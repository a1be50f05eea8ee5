// SPDX-License-Identifier: Apache-2.0
#include "gennav/env.hpp"
#include "gennav/policy.hpp"

#include <benchmark/benchmark.h>

using namespace gennav;

static void BM_SimEpisodeHeuristic(benchmark::State& state)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(256, 3);
    auto const navigator = policy::HeuristicNavigator {};
    auto i = std::size_t {0};
    for (auto _: state)
    {
        benchmark::DoNotOptimize(env::run_episode(navigator, environment, pool[i % pool.size()], 3, Rng(1).split(i)));
        ++i;
    }
}
BENCHMARK(BM_SimEpisodeHeuristic);

static void BM_PreferenceReference(benchmark::State& state)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(256, 3);
    auto i = std::size_t {0};
    for (auto _: state)
    {
        benchmark::DoNotOptimize(policy::preference_reference(environment, pool[i % pool.size()], 3, Rng(1).split(i)));
        ++i;
    }
}
BENCHMARK(BM_PreferenceReference);
