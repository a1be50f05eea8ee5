// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"
#include "oracles.hpp"

#include "gennav/error.hpp"
#include "gennav/reward.hpp"
#include "gennav/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace gennav;
using namespace gennav::reward;
using gennav::testing::reward_by_hand;

namespace
{

RewardWeights no_format(double alpha = 0.25, double beta = 0.025, int t_max = 3)
{
    auto w = RewardWeights {};
    w.alpha = alpha;
    w.beta = beta;
    w.gamma = 0.0;
    w.t_max = t_max;
    return w;
}

double reward_of(std::vector<double> const& scores, RewardWeights const& w)
{
    return pre_grpo_reward(compute_stats(scores, true, w), w);
}

} // namespace

TEST_CASE("compute_stats worked examples")
{
    auto const w = RewardWeights {};
    auto s = compute_stats(std::vector {4.50, 4.80}, true, w);
    CHECK(s.peak == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(s.retention == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(s.efficiency == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.length == 2);

    s = compute_stats(std::vector {5.0}, true, w);
    CHECK(s.peak == 1.0);
    CHECK(s.retention == 1.0);
    CHECK(s.efficiency == 0.0);

    s = compute_stats(std::vector {3.00, 4.80, 4.00}, true, w);
    CHECK(s.peak == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(s.retention == doctest::Approx(0.80).epsilon(1e-12));
    CHECK(s.efficiency == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compute_stats errors and the single-turn budget")
{
    auto const w = RewardWeights {};
    CHECK_THROWS_WITH_AS(compute_stats(std::vector {1.0, 2.0, 3.0, 4.0}, true, w),
                         doctest::Contains("budget violation"), Error);
    CHECK_THROWS_WITH_AS(compute_stats(std::vector<double> {}, true, w), "no generated candidates", Error);

    auto one = w;
    one.t_max = 1;
    CHECK(compute_stats(std::vector {4.0}, true, one).efficiency == 0.0);
}

TEST_CASE("format flag follows every action including a trailing STOP")
{
    auto const w = RewardWeights {};
    auto t = gennav::testing::trajectory_from_scores({3.0, 4.0}, true);
    CHECK(compute_stats(t, w).format_ok == 1.0);
    t.turns.back().action.well_formed = false;
    CHECK(compute_stats(t, w).format_ok == 0.0);

    auto u = gennav::testing::trajectory_from_scores({3.0, 4.0});
    u.turns[1].action = ActionRecord::parse("bogus", std::string("x"));
    CHECK(compute_stats(u, w).format_ok == 0.0);
    CHECK(reward_variant(u, w, RewardVariant::PreGrpo)
          == doctest::Approx(reward_variant(gennav::testing::trajectory_from_scores({3.0, 4.0}), w,
                                            RewardVariant::PreGrpo)
                             - w.gamma)
                 .epsilon(1e-12));
}

TEST_CASE("pre_grpo_reward reproduces the worked comparisons")
{
    auto const w = no_format();
    CHECK(std::abs(reward_of({4.80}, w) - 1.2000) <= 1e-9);
    CHECK(std::abs(reward_of({4.50, 4.80}, w) - 1.1875) <= 1e-9);
    CHECK(std::abs(reward_of({3.00, 4.00, 4.80}, w) - 1.1750) <= 1e-9);
    CHECK(std::abs(reward_of({3.00, 4.80, 4.00}, w) - 1.1350) <= 1e-9);

    auto const steep = no_format(0.25, 0.05);
    CHECK(std::abs(reward_of({4.83}, steep) - 1.2075) <= 1e-9);
    CHECK(std::abs(reward_of({4.0, 4.6, 5.0}, steep) - 1.2000) <= 1e-9);

    auto const heavy = no_format(4.0, 0.025);
    CHECK(std::abs(reward_of({3.00, 4.50, 4.70}, heavy) - 4.6750) <= 1e-9);
    CHECK(std::abs(reward_of({3.00, 4.90, 4.64}, heavy) - 4.6670) <= 1e-9);

    CHECK(reward_of({0.0}, w) == 0.0);
}

TEST_CASE("pre_grpo_reward agrees with the hand oracle")
{
    auto rng = Rng(5);
    for (int trial = 0; trial < 2000; ++trial)
    {
        auto const tmax = 1 + static_cast<int>(rng.next_u64() % 4);
        auto const n = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(tmax));
        auto scores = std::vector<double> {};
        for (int i = 0; i < n; ++i)
            scores.push_back(5.0 * rng.uniform());
        auto const w = no_format(rng.uniform() * 4.0, rng.uniform() * 0.2, tmax);
        CHECK(reward_of(scores, w) == doctest::Approx(reward_by_hand(scores, w.alpha, w.beta, tmax)).epsilon(1e-12));
    }
}

TEST_CASE("reward variants")
{
    auto const w = no_format();
    auto const stats = compute_stats(std::vector {3.00, 4.80, 4.00}, true, w);
    CHECK(reward_variant(stats, w, RewardVariant::BestOnly) == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(reward_variant(stats, w, RewardVariant::FinalOnly) == doctest::Approx(0.80).epsilon(1e-12));
    CHECK(reward_variant(stats, w, RewardVariant::PreGrpo) == doctest::Approx(1.1350).epsilon(1e-12));

    auto const rising = compute_stats(std::vector {3.00, 4.00, 4.80}, true, w);
    CHECK(reward_variant(rising, w, RewardVariant::NoEfficiency) == doctest::Approx(1.2000).epsilon(1e-12));
    CHECK(reward_variant(rising, w, RewardVariant::NoPeak) == doctest::Approx(0.25 * 0.96 - 0.025).epsilon(1e-12));
    CHECK(reward_variant(rising, w, RewardVariant::NoRetention) == doctest::Approx(0.96 - 0.025).epsilon(1e-12));

    auto const g = RewardWeights {};
    auto const formatted = compute_stats(std::vector {3.00, 4.80, 4.00}, true, g);
    CHECK(reward_variant(formatted, g, RewardVariant::BestOnly) == doctest::Approx(0.96 + 0.1).epsilon(1e-12));
    CHECK(reward_variant(formatted, g, RewardVariant::FinalOnly) == doctest::Approx(0.80 + 0.1).epsilon(1e-12));
}

TEST_CASE("reward variant names round-trip")
{
    for (auto v: {RewardVariant::PreGrpo, RewardVariant::FinalOnly, RewardVariant::BestOnly, RewardVariant::NoPeak,
                  RewardVariant::NoRetention, RewardVariant::NoEfficiency})
        CHECK(parse_reward_variant(to_string(v)) == v);
    CHECK_FALSE(parse_reward_variant("BEST").has_value());
}

TEST_CASE("decomposition identity on random stats")
{
    auto rng = Rng(17);
    for (int trial = 0; trial < 10000; ++trial)
    {
        auto const p = rng.uniform();
        auto const r = p * rng.uniform();
        auto const a = rng.uniform() * 5.0;
        CHECK(std::abs((p + a * r) - ((1 + a) * p - a * (p - r))) <= 1e-12);
    }
}

TEST_CASE("reward ignores the order of non-final non-max scores")
{
    auto const w = no_format(0.25, 0.025, 5);
    auto const base = reward_of({1.0, 2.0, 4.9, 3.0, 4.0}, w);
    CHECK(reward_of({3.0, 4.9, 2.0, 1.0, 4.0}, w) == base);
    CHECK(reward_of({4.9, 3.0, 1.0, 2.0, 4.0}, w) == base);
}

TEST_CASE("reward strictly decreases in T at fixed peak and retention")
{
    auto const w = no_format(0.25, 0.025, 4);
    CHECK(reward_of({4.0}, w) > reward_of({4.0, 4.0}, w));
    CHECK(reward_of({4.0, 4.0}, w) > reward_of({4.0, 1.0, 4.0}, w));
    CHECK(reward_of({4.0, 1.0, 4.0}, w) > reward_of({4.0, 1.0, 2.0, 4.0}, w));
}

TEST_CASE("group_advantages examples")
{
    auto zero = group_advantages(std::vector {1.0, 1.0, 1.0}, 1e-8);
    CHECK(zero == std::vector {0.0, 0.0, 0.0});

    auto three = group_advantages(std::vector {1.0, 2.0, 3.0}, 1e-8);
    REQUIRE(three.size() == 3);
    CHECK(three[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(three[1] == doctest::Approx(0.0));
    CHECK(three[2] == doctest::Approx(1.2247).epsilon(1e-4));

    auto two = group_advantages(std::vector {0.5, 1.5}, 1e-8);
    CHECK(two[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(two[1] == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_WITH_AS(group_advantages(std::vector {1.0}, 1e-8), doctest::Contains("degenerate group"), Error);
}

TEST_CASE("group_advantages properties")
{
    auto rng = Rng(23);
    for (int trial = 0; trial < 2000; ++trial)
    {
        auto const k = 2 + static_cast<std::size_t>(rng.next_u64() % 15);
        auto rewards = std::vector<double> {};
        for (std::size_t i = 0; i < k; ++i)
            rewards.push_back(rng.normal(1.0, 0.3));
        auto const a = group_advantages(rewards, 1e-8);
        auto const oracle = gennav::testing::advantages_by_hand(rewards, 1e-8);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(a[i] == doctest::Approx(oracle[i]).epsilon(1e-9));

        auto const mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(k);
        CHECK(std::abs(mean) <= 1e-9);
        auto var = 0.0;
        for (auto x: a)
            var += (x - mean) * (x - mean);
        CHECK(std::abs(std::sqrt(var / static_cast<double>(k)) - 1.0) <= 1e-4);

        auto shifted = rewards;
        auto const c = rng.normal(0.0, 3.0);
        for (auto& r: shifted)
            r += c;
        auto const b = group_advantages(shifted, 1e-8);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(std::abs(a[i] - b[i]) <= 1e-9);

        auto scaled = rewards;
        for (auto& r: scaled)
            r *= 2.5;
        auto const s = group_advantages(scaled, 1e-8);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (rewards[i] < rewards[j])
                    CHECK(s[i] < s[j]);
    }
}

TEST_CASE("weights validation")
{
    auto w = RewardWeights {};
    CHECK_NOTHROW(w.validate());
    w.alpha = -1;
    CHECK_THROWS_AS(w.validate(), InputError);
    w = RewardWeights {};
    w.epsilon = 0;
    CHECK_THROWS_AS(w.validate(), InputError);
    w = RewardWeights {};
    w.t_max = 0;
    CHECK_THROWS_AS(w.validate(), InputError);
}
