// SPDX-License-Identifier: Apache-2.0
#include "gennav/reward.hpp"

#include "gennav/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace gennav::reward
{

namespace
{

constexpr auto kVariantNames = std::array {
    std::pair {RewardVariant::PreGrpo, std::string_view("pre-grpo")},
    std::pair {RewardVariant::FinalOnly, std::string_view("final-only")},
    std::pair {RewardVariant::BestOnly, std::string_view("best-only")},
    std::pair {RewardVariant::NoPeak, std::string_view("no-peak")},
    std::pair {RewardVariant::NoRetention, std::string_view("no-retention")},
    std::pair {RewardVariant::NoEfficiency, std::string_view("no-efficiency")},
};

bool all_well_formed(const Trajectory& trajectory)
{
    return std::all_of(trajectory.turns.begin(), trajectory.turns.end(),
                       [](const TurnRecord& t) { return t.action.well_formed; });
}

} // namespace

void RewardWeights::validate() const
{
    if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0))
        throw InputError("reward weights alpha, beta, gamma must be >= 0");
    if (!(rho_max > 0.0))
        throw InputError("rho_max must be > 0");
    if (t_max < 1)
        throw InputError("t_max must be >= 1");
    if (!(epsilon > 0.0))
        throw InputError("epsilon must be > 0");
}

std::string_view to_string(RewardVariant variant)
{
    for (auto const& [v, name]: kVariantNames)
        if (v == variant)
            return name;
    return "unknown";
}

std::optional<RewardVariant> parse_reward_variant(std::string_view text)
{
    auto normalized = std::string(text);
    std::replace(normalized.begin(), normalized.end(), '_', '-');
    std::transform(normalized.begin(), normalized.end(), normalized.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto const& [v, name]: kVariantNames)
        if (normalized == name)
            return v;
    return std::nullopt;
}

TrajectoryStats compute_stats(std::span<const double> scores, bool format_ok, const RewardWeights& weights)
{
    if (scores.empty())
        throw Error("no generated candidates");
    auto const length = static_cast<int>(scores.size());
    if (length > weights.t_max)
        throw Error("budget violation: " + std::to_string(length) + " candidates exceed t_max="
                    + std::to_string(weights.t_max));

    // reviewer contract already bounds rho; clamp anyway
    auto normalize = [&](double rho) { return std::clamp(rho / weights.rho_max, 0.0, 1.0); };

    auto stats = TrajectoryStats {};
    stats.peak = normalize(*std::max_element(scores.begin(), scores.end()));
    stats.retention = normalize(scores.back());
    stats.efficiency = weights.t_max > 1 ? static_cast<double>(length - 1) / (weights.t_max - 1) : 0.0;
    stats.format_ok = format_ok ? 1.0 : 0.0;
    stats.length = length;
    return stats;
}

TrajectoryStats compute_stats(const Trajectory& trajectory, const RewardWeights& weights)
{
    auto const scores = score_sequence(trajectory);
    return compute_stats(scores, all_well_formed(trajectory), weights);
}

double pre_grpo_reward(const TrajectoryStats& stats, const RewardWeights& weights)
{
    return stats.peak + weights.alpha * stats.retention - weights.beta * stats.efficiency
           + weights.gamma * stats.format_ok;
}

double reward_variant(const TrajectoryStats& stats, const RewardWeights& weights, RewardVariant variant)
{
    auto const format = weights.gamma * stats.format_ok;
    switch (variant)
    {
        case RewardVariant::PreGrpo: return pre_grpo_reward(stats, weights);
        case RewardVariant::FinalOnly: return stats.retention + format;
        case RewardVariant::BestOnly: return stats.peak + format;
        case RewardVariant::NoPeak: return weights.alpha * stats.retention - weights.beta * stats.efficiency + format;
        case RewardVariant::NoRetention: return stats.peak - weights.beta * stats.efficiency + format;
        case RewardVariant::NoEfficiency: return stats.peak + weights.alpha * stats.retention + format;
    }
    throw Error("unknown reward variant");
}

double reward_variant(const Trajectory& trajectory, const RewardWeights& weights, RewardVariant variant)
{
    return reward_variant(compute_stats(trajectory, weights), weights, variant);
}

std::vector<double> group_advantages(std::span<const double> rewards, double epsilon)
{
    if (rewards.size() < 2)
        throw Error("degenerate group: advantage normalization needs K >= 2 rollouts");

    auto const n = static_cast<double>(rewards.size());
    auto const mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    auto sq = 0.0;
    for (auto r: rewards)
        sq += (r - mean) * (r - mean);
    auto const stddev = std::sqrt(sq / n);

    auto advantages = std::vector<double>(rewards.size());
    std::transform(rewards.begin(), rewards.end(), advantages.begin(),
                   [&](double r) { return (r - mean) / (stddev + epsilon); });
    return advantages;
}

} // namespace gennav::reward
