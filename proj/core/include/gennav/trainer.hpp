// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/env.hpp"
#include "gennav/metrics.hpp"
#include "gennav/policy.hpp"
#include "gennav/reward.hpp"
#include "gennav/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gennav::trainer {

enum class InitMode
{
    Zeros,
    Heuristic, ///< least-squares fit to the heuristic policy's margins
};

std::string_view to_string(InitMode mode);
std::optional<InitMode> parse_init_mode(std::string_view text);

struct TrainConfig
{
    int group_size = 8;
    int steps = 300;
    double learning_rate = 1.0;
    double clip_epsilon = 0.2;
    reward::RewardVariant reward_variant = reward::RewardVariant::PreGrpo;
    reward::RewardWeights weights; ///< weights.t_max is the episode budget
    std::uint64_t seed = 0;
    int prompts_per_step = 8;
    int inner_epochs = 1;

    InitMode init = InitMode::Heuristic;
    policy::HeuristicThresholds init_thresholds;
    double init_sharpness = 40.0;

    int workers = 1; ///< parallel group collection; results do not depend on it

    void validate() const;
};

policy::PolicyParams initial_params(const TrainConfig& config);

/// K episodes for one prompt; episode k uses rng.split(k). Behaviour log-probs are
/// stored per trajectory and per turn.
RolloutGroup collect_group(const policy::PolicyParams& params, const env::Environment& environment,
                           const PromptSpec& prompt, int group_size, int t_max, const Rng& rng);

struct StepDiagnostics
{
    double mean_reward = 0.0;
    double clip_fraction = 0.0;
    double mean_peak = 0.0;
    double mean_retention = 0.0;
    double mean_efficiency = 0.0;
    double mean_format = 0.0;
    double mean_turns = 0.0;
    /// max over actions of |surrogate| / |A_i| (bounded by 1 + clip_epsilon whenever the ratio
    /// stays at or below 1 + clip_epsilon or the advantage is positive)
    double max_surrogate_ratio = 0.0;
    double gradient_norm = 0.0;
    std::size_t decisions = 0;
    bool aborted = false;
    std::string abort_reason;
};

struct UpdateResult
{
    policy::PolicyParams params;
    StepDiagnostics diagnostics;
};

/// One clipped-surrogate ascent step (per inner epoch) over the given groups. Each action
/// of trajectory i is weighted by that trajectory's advantage A_i. A non-finite gradient
/// aborts the step and returns the input parameters.
UpdateResult grpo_update(const policy::PolicyParams& params, std::span<const RolloutGroup> groups,
                         const TrainConfig& config);
UpdateResult grpo_update(const policy::PolicyParams& params, const RolloutGroup& group, const TrainConfig& config);

struct CurveRecord
{
    int step = 0;
    double mean_reward = 0.0;
    metrics::ActionShares actions;
    double mean_turns = 0.0;
    double mean_peak = 0.0;
    double mean_gap = 0.0;
    double clip_fraction = 0.0;
    bool aborted = false;
};

struct TrainResult
{
    policy::PolicyParams params;
    std::vector<CurveRecord> curve;
};

using CurveCallback = std::function<void(const CurveRecord&)>;

/// Runs config.steps updates, each on config.prompts_per_step groups drawn from the pool.
TrainResult train(const TrainConfig& config, const env::Environment& environment,
                  std::span<const PromptSpec> pool, std::optional<policy::PolicyParams> start = std::nullopt,
                  const CurveCallback& on_step = {});

std::string encode_curve_record(const CurveRecord& record);

struct EvalReport
{
    std::size_t episodes = 0;
    double mean_best = 0.0;
    double mean_final = 0.0;
    double best_minus_final = 0.0;
    double mean_peak = 0.0; ///< normalized
    double mean_gap = 0.0;  ///< normalized peak minus retention
    double avg_turns = 0.0;
    std::vector<metrics::TurnMean> per_turn;
    metrics::ActionShares actions;

    bool operator==(const EvalReport& other) const;
};

/// One episode per (seed, prompt); the episode stream is Rng(seed).split(prompt index).
EvalReport evaluate(const env::Navigator& navigator, const env::Environment& environment,
                    std::span<const PromptSpec> pool, int t_max, std::span<const std::uint64_t> seeds,
                    int workers = 1, std::vector<Trajectory>* logs = nullptr);

EvalReport summarize(std::span<const Trajectory> logs);

std::string encode_eval_report(const EvalReport& report);

} // namespace gennav::trainer
