// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/types.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace gennav::reward {

struct RewardWeights
{
    double alpha = 0.25;   ///< retention weight
    double beta = 0.025;   ///< turn-cost weight
    double gamma = 0.1;    ///< format weight
    double rho_max = kRhoMax;
    int t_max = 3;
    double epsilon = 1e-8; ///< advantage denominator guard

    void validate() const;
};

/// Trajectory-level statistics, all normalized to [0,1] except `length`.
struct TrajectoryStats
{
    double peak = 0.0;
    double retention = 0.0;
    double efficiency = 0.0;
    double format_ok = 1.0;
    int length = 0;
};

enum class RewardVariant
{
    PreGrpo,
    FinalOnly,
    BestOnly,
    NoPeak,
    NoRetention,
    NoEfficiency,
};

std::string_view to_string(RewardVariant variant);
std::optional<RewardVariant> parse_reward_variant(std::string_view text);

/// Peak, retention and efficiency from a raw score sequence.
TrajectoryStats compute_stats(std::span<const double> scores, bool format_ok, const RewardWeights& weights);
TrajectoryStats compute_stats(const Trajectory& trajectory, const RewardWeights& weights);

/// P + alpha*R - beta*E + gamma*F
double pre_grpo_reward(const TrajectoryStats& stats, const RewardWeights& weights);

double reward_variant(const TrajectoryStats& stats, const RewardWeights& weights, RewardVariant variant);
double reward_variant(const Trajectory& trajectory, const RewardWeights& weights, RewardVariant variant);

/// Group-relative advantages: (R_i - mean) / (population std + epsilon).
std::vector<double> group_advantages(std::span<const double> rewards, double epsilon);

} // namespace gennav::reward
