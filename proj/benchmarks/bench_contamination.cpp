// SPDX-License-Identifier: Apache-2.0
#include "gennav/contamination.hpp"
#include "gennav/rng.hpp"

#include <benchmark/benchmark.h>

using namespace gennav;

namespace
{

std::vector<std::string> corpus(std::size_t count, std::uint64_t seed)
{
    auto rng = Rng(seed);
    auto texts = std::vector<std::string> {};
    for (std::size_t i = 0; i < count; ++i)
    {
        auto text = std::string {};
        for (int w = 0; w < 20; ++w)
            text += (text.empty() ? "" : " ") + std::string("w") + std::to_string(rng.next_u64() % 2000);
        texts.push_back(text);
    }
    return texts;
}

} // namespace

static void BM_PoolIndexBuild(benchmark::State& state)
{
    auto const pool = corpus(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _: state)
        benchmark::DoNotOptimize(contamination::PoolIndex(pool));
}
BENCHMARK(BM_PoolIndexBuild)->Arg(1000)->Arg(10000);

static void BM_Flag8gram(benchmark::State& state)
{
    auto const index = contamination::PoolIndex(corpus(static_cast<std::size_t>(state.range(0)), 1));
    auto const bench = corpus(64, 2);
    auto i = std::size_t {0};
    for (auto _: state)
        benchmark::DoNotOptimize(contamination::flag_8gram(bench[i++ % bench.size()], index));
}
BENCHMARK(BM_Flag8gram)->Arg(1000)->Arg(10000);

static void BM_Audit(benchmark::State& state)
{
    auto const index = contamination::PoolIndex(corpus(5000, 1));
    auto const bench = corpus(200, 2);
    for (auto _: state)
        benchmark::DoNotOptimize(contamination::audit(bench, index));
}
BENCHMARK(BM_Audit)->Unit(benchmark::kMillisecond);
