// SPDX-License-Identifier: Apache-2.0
#include "gennav/env.hpp"
#include "gennav/trainer.hpp"

#include <benchmark/benchmark.h>

using namespace gennav;

static void BM_CollectGroup(benchmark::State& state)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const prompt = env::synthetic_prompt_pool(1, 4).front();
    auto const params = trainer::initial_params(trainer::TrainConfig {});
    auto i = std::uint64_t {0};
    for (auto _: state)
        benchmark::DoNotOptimize(trainer::collect_group(params, environment, prompt, 8, 3, Rng(i++)));
}
BENCHMARK(BM_CollectGroup);

static void BM_GrpoUpdate(benchmark::State& state)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(8, 4);
    auto const config = trainer::TrainConfig {};
    auto const params = trainer::initial_params(config);
    auto groups = std::vector<RolloutGroup> {};
    for (std::size_t i = 0; i < pool.size(); ++i)
        groups.push_back(trainer::collect_group(params, environment, pool[i], 8, 3, Rng(5).split(i)));
    for (auto _: state)
        benchmark::DoNotOptimize(trainer::grpo_update(params, groups, config));
}
BENCHMARK(BM_GrpoUpdate);

static void BM_TrainSteps(benchmark::State& state)
{
    auto const environment = env::SimEnvironment(env::SimEnvConfig {});
    auto const pool = env::synthetic_prompt_pool(200, 4);
    auto config = trainer::TrainConfig {};
    config.steps = static_cast<int>(state.range(0));
    for (auto _: state)
        benchmark::DoNotOptimize(trainer::train(config, environment, pool));
}
BENCHMARK(BM_TrainSteps)->Arg(10)->Unit(benchmark::kMillisecond);
