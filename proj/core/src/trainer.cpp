// SPDX-License-Identifier: Apache-2.0
#include "gennav/trainer.hpp"

#include "gennav/error.hpp"
#include "gennav/parallel.hpp"
#include "gennav/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gennav::trainer
{

std::string_view to_string(InitMode mode)
{
    return mode == InitMode::Zeros ? "zeros" : "heuristic";
}

std::optional<InitMode> parse_init_mode(std::string_view text)
{
    auto lowered = std::string(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "zeros")
        return InitMode::Zeros;
    if (lowered == "heuristic")
        return InitMode::Heuristic;
    return std::nullopt;
}

void TrainConfig::validate() const
{
    weights.validate();
    if (group_size < 2)
        throw InputError("group size K must be >= 2");
    if (steps < 0)
        throw InputError("steps must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw InputError("learning rate must be positive");
    if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
        throw InputError("clip epsilon must lie in (0,1)");
    if (prompts_per_step < 1)
        throw InputError("prompts per step must be >= 1");
    if (inner_epochs < 1)
        throw InputError("inner epochs must be >= 1");
    if (workers < 0)
        throw InputError("workers must be >= 0");
    if (!std::isfinite(init_sharpness))
        throw InputError("init sharpness must be finite");
}

policy::PolicyParams initial_params(const TrainConfig& config)
{
    if (config.init == InitMode::Zeros)
        return policy::PolicyParams {};
    return policy::fit_heuristic_params(config.init_thresholds, config.weights.t_max, config.init_sharpness);
}

namespace
{

std::vector<double> behaviour_log_probs(const policy::PolicyParams& params, const Trajectory& trajectory)
{
    auto logProbs = std::vector<double> {};
    logProbs.reserve(trajectory.turns.size());
    auto const turns = std::span<const TurnRecord>(trajectory.turns);
    for (std::size_t i = 0; i < turns.size(); ++i)
    {
        auto const turn = turns[i].turn_index;
        auto const features = policy::extract_features(trajectory.prompt, turns.first(i), turn, trajectory.t_max);
        logProbs.push_back(policy::log_prob(params, features, turn, turns[i].action.choice));
    }
    return logProbs;
}

} // namespace

RolloutGroup collect_group(const policy::PolicyParams& params, const env::Environment& environment,
                           const PromptSpec& prompt, int group_size, int t_max, const Rng& rng)
{
    if (group_size < 2)
        throw InputError("group size K must be >= 2");
    auto const navigator = policy::SoftmaxNavigator(params);
    auto group = RolloutGroup {.prompt = prompt, .trajectories = {}, .old_log_probs = {}};
    group.trajectories.reserve(static_cast<std::size_t>(group_size));
    for (auto k = 0; k < group_size; ++k)
    {
        group.trajectories.push_back(env::run_episode(navigator, environment, prompt, t_max,
                                                      rng.split(static_cast<std::uint64_t>(k))));
        group.old_log_probs.push_back(behaviour_log_probs(params, group.trajectories.back()));
    }
    return group;
}

namespace
{

struct EpochOutcome
{
    policy::WeightMatrix gradient = policy::WeightMatrix::Zero();
    std::size_t decisions = 0;
    std::size_t clipped = 0;
    double max_surrogate_ratio = 0.0;
};

EpochOutcome epoch_gradient(const policy::PolicyParams& params, std::span<const RolloutGroup> groups,
                            std::span<const std::vector<double>> advantages, double clip_epsilon)
{
    auto outcome = EpochOutcome {};
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        auto const& group = groups[g];
        auto groupGradient = policy::WeightMatrix::Zero().eval();
        for (std::size_t i = 0; i < group.trajectories.size(); ++i)
        {
            auto const& trajectory = group.trajectories[i];
            auto const advantage = advantages[g][i];
            auto const turns = std::span<const TurnRecord>(trajectory.turns);
            auto trajectoryGradient = policy::WeightMatrix::Zero().eval();
            auto decisions = 0;
            for (std::size_t pos = 0; pos < turns.size(); ++pos)
            {
                auto const turn = turns[pos].turn_index;
                if (turn < 2)
                    continue;
                ++decisions;
                auto const choice = turns[pos].action.choice;
                auto const features = policy::extract_features(trajectory.prompt, turns.first(pos), turn,
                                                               trajectory.t_max);
                auto const ratio = std::exp(policy::log_prob(params, features, turn, choice)
                                            - group.old_log_probs[i][pos]);
                auto const clippedRatio = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
                auto const unclipped = ratio * advantage;
                auto const clipped = clippedRatio * advantage;
                auto const surrogate = std::min(unclipped, clipped);
                if (advantage != 0.0)
                    outcome.max_surrogate_ratio = std::max(outcome.max_surrogate_ratio,
                                                           std::abs(surrogate) / std::abs(advantage));
                // the min selects the clipped branch, whose gradient is zero
                if (clipped < unclipped)
                {
                    ++outcome.clipped;
                    continue;
                }
                trajectoryGradient += unclipped * policy::log_prob_gradient(params, features, turn, choice);
            }
            outcome.decisions += static_cast<std::size_t>(decisions);
            if (decisions > 0)
                groupGradient += trajectoryGradient / static_cast<double>(decisions);
        }
        outcome.gradient += groupGradient / static_cast<double>(group.trajectories.size());
    }
    if (!groups.empty())
        outcome.gradient /= static_cast<double>(groups.size());
    return outcome;
}

} // namespace

UpdateResult grpo_update(const policy::PolicyParams& params, std::span<const RolloutGroup> groups,
                         const TrainConfig& config)
{
    auto result = UpdateResult {.params = params, .diagnostics = {}};
    auto& diag = result.diagnostics;

    auto advantages = std::vector<std::vector<double>> {};
    auto trajectories = 0.0;
    for (auto const& group: groups)
    {
        if (group.trajectories.size() < 2)
            throw InputError("degenerate group");
        if (group.old_log_probs.size() != group.trajectories.size())
            throw InputError("rollout group lacks behaviour log-probabilities");
        auto rewards = std::vector<double> {};
        for (std::size_t i = 0; i < group.trajectories.size(); ++i)
        {
            auto const& trajectory = group.trajectories[i];
            if (trajectory.prompt.id != group.prompt.id)
                throw InputError("rollout group mixes prompts");
            if (group.old_log_probs[i].size() != trajectory.turns.size())
                throw InputError("behaviour log-probabilities do not match the trajectory length");
            auto const stats = reward::compute_stats(trajectory, config.weights);
            rewards.push_back(reward::reward_variant(stats, config.weights, config.reward_variant));
            diag.mean_reward += rewards.back();
            diag.mean_peak += stats.peak;
            diag.mean_retention += stats.retention;
            diag.mean_efficiency += stats.efficiency;
            diag.mean_format += stats.format_ok;
            diag.mean_turns += stats.length;
            trajectories += 1.0;
        }
        advantages.push_back(reward::group_advantages(rewards, config.weights.epsilon));
    }
    if (trajectories > 0.0)
        for (auto* value: {&diag.mean_reward, &diag.mean_peak, &diag.mean_retention, &diag.mean_efficiency,
                           &diag.mean_format, &diag.mean_turns})
            *value /= trajectories;

    for (auto epoch = 0; epoch < config.inner_epochs; ++epoch)
    {
        auto const outcome = epoch_gradient(result.params, groups, advantages, config.clip_epsilon);
        if (epoch == 0)
        {
            diag.decisions = outcome.decisions;
            diag.clip_fraction = outcome.decisions > 0
                                     ? static_cast<double>(outcome.clipped) / static_cast<double>(outcome.decisions)
                                     : 0.0;
            diag.gradient_norm = outcome.gradient.norm();
        }
        diag.max_surrogate_ratio = std::max(diag.max_surrogate_ratio, outcome.max_surrogate_ratio);
        if (!outcome.gradient.allFinite())
        {
            diag.aborted = true;
            diag.abort_reason = "non-finite gradient in epoch " + std::to_string(epoch + 1);
            result.params = params;
            return result;
        }
        result.params.weights += config.learning_rate * outcome.gradient;
    }
    if (!result.params.finite())
    {
        diag.aborted = true;
        diag.abort_reason = "non-finite parameters after update";
        result.params = params;
    }
    return result;
}

UpdateResult grpo_update(const policy::PolicyParams& params, const RolloutGroup& group, const TrainConfig& config)
{
    return grpo_update(params, std::span<const RolloutGroup>(&group, 1), config);
}

TrainResult train(const TrainConfig& config, const env::Environment& environment, std::span<const PromptSpec> pool,
                  std::optional<policy::PolicyParams> start, const CurveCallback& on_step)
{
    config.validate();
    if (pool.empty() && config.steps > 0)
        throw InputError("training needs a non-empty prompt pool");

    auto result = TrainResult {.params = start ? *start : initial_params(config), .curve = {}};
    if (!result.params.finite())
        throw InputError("initial policy parameters are not finite");

    auto const root = Rng(config.seed);
    auto const perStep = static_cast<std::size_t>(config.prompts_per_step);
    for (auto step = 0; step < config.steps; ++step)
    {
        auto const stepRng = root.split(static_cast<std::uint64_t>(step));
        auto const selector = stepRng.split(0);
        auto const rollouts = stepRng.split(1);

        auto groups = std::vector<RolloutGroup>(perStep);
        parallel_for(perStep, config.workers, [&](std::size_t j) {
            auto const index = selector.split(j).next_u64() % pool.size();
            groups[j] = collect_group(result.params, environment, pool[index], config.group_size,
                                      config.weights.t_max, rollouts.split(j));
        });

        auto flat = std::vector<Trajectory> {};
        for (auto const& group: groups)
            flat.insert(flat.end(), group.trajectories.begin(), group.trajectories.end());

        auto update = grpo_update(result.params, groups, config);
        auto const gap = metrics::peak_gap(flat, config.weights.rho_max);
        auto record = CurveRecord {
            .step = step,
            .mean_reward = update.diagnostics.mean_reward,
            .actions = metrics::action_distribution(flat),
            .mean_turns = metrics::avg_turns(flat),
            .mean_peak = gap.mean_peak,
            .mean_gap = gap.mean_gap,
            .clip_fraction = update.diagnostics.clip_fraction,
            .aborted = update.diagnostics.aborted,
        };
        result.params = std::move(update.params);
        if (on_step)
            on_step(record);
        result.curve.push_back(std::move(record));
    }
    return result;
}

namespace
{

io::Json shares_json(const metrics::ActionShares& shares)
{
    auto j = io::Json::object();
    for (auto const choice: kAllActions)
        j[std::string(to_string(choice))] = shares.share(choice);
    return j;
}

} // namespace

std::string encode_curve_record(const CurveRecord& record)
{
    auto j = io::Json::object();
    j["step"] = record.step;
    j["mean_reward"] = record.mean_reward;
    j["actions"] = shares_json(record.actions);
    j["mean_turns"] = record.mean_turns;
    j["mean_peak"] = record.mean_peak;
    j["mean_gap"] = record.mean_gap;
    j["clip_fraction"] = record.clip_fraction;
    j["aborted"] = record.aborted;
    return j.dump();
}

bool EvalReport::operator==(const EvalReport& other) const
{
    auto sameCurve = per_turn.size() == other.per_turn.size();
    for (std::size_t i = 0; sameCurve && i < per_turn.size(); ++i)
        sameCurve = per_turn[i].turn == other.per_turn[i].turn && per_turn[i].mean == other.per_turn[i].mean
                    && per_turn[i].count == other.per_turn[i].count;
    return sameCurve && episodes == other.episodes && mean_best == other.mean_best
           && mean_final == other.mean_final && best_minus_final == other.best_minus_final
           && mean_peak == other.mean_peak && mean_gap == other.mean_gap && avg_turns == other.avg_turns
           && actions.counts == other.actions.counts;
}

EvalReport summarize(std::span<const Trajectory> logs)
{
    auto report = EvalReport {};
    report.episodes = logs.size();
    if (logs.empty())
        return report;
    auto const bvf = metrics::best_vs_final(logs);
    auto const gap = metrics::peak_gap(logs);
    report.mean_best = bvf.mean_best;
    report.mean_final = bvf.mean_final;
    report.best_minus_final = bvf.delta;
    report.mean_peak = gap.mean_peak;
    report.mean_gap = gap.mean_gap;
    report.avg_turns = metrics::avg_turns(logs);
    report.per_turn = metrics::per_turn_curve(logs);
    report.actions = metrics::action_distribution(logs);
    return report;
}

EvalReport evaluate(const env::Navigator& navigator, const env::Environment& environment,
                    std::span<const PromptSpec> pool, int t_max, std::span<const std::uint64_t> seeds, int workers,
                    std::vector<Trajectory>* logs)
{
    auto trajectories = std::vector<Trajectory>(seeds.size() * pool.size());
    parallel_for(trajectories.size(), workers, [&](std::size_t n) {
        auto const seed = seeds[n / pool.size()];
        auto const index = n % pool.size();
        trajectories[n] = env::run_episode(navigator, environment, pool[index], t_max, Rng(seed).split(index));
    });
    auto report = summarize(trajectories);
    if (logs)
        *logs = std::move(trajectories);
    return report;
}

std::string encode_eval_report(const EvalReport& report)
{
    auto j = io::Json::object();
    j["episodes"] = report.episodes;
    j["mean_best"] = report.mean_best;
    j["mean_final"] = report.mean_final;
    j["best_minus_final"] = report.best_minus_final;
    j["mean_peak"] = report.mean_peak;
    j["mean_gap"] = report.mean_gap;
    j["avg_turns"] = report.avg_turns;
    auto curve = io::Json::array();
    for (auto const& point: report.per_turn)
        curve.push_back(io::Json {{"turn", point.turn}, {"mean", point.mean}, {"count", point.count}});
    j["per_turn"] = std::move(curve);
    j["actions"] = shares_json(report.actions);
    return j.dump();
}

} // namespace gennav::trainer
