// SPDX-License-Identifier: Apache-2.0
#include "gennav/metrics.hpp"

#include "gennav/error.hpp"

#include <algorithm>
#include <cmath>

namespace gennav::metrics
{

namespace
{

constexpr double kMarginSlack = 1e-9;

void require_logs(std::span<const Trajectory> logs, const char* what)
{
    if (logs.empty())
        throw InputError(std::string(what) + ": no trajectories");
}

} // namespace

ActionShares action_distribution(std::span<const Trajectory> logs)
{
    auto result = ActionShares {};
    for (auto const& trajectory: logs)
        for (auto const& turn: trajectory.turns)
        {
            if (turn.turn_index < 2)
                continue;
            ++result.counts[index_of(turn.action.choice)];
            ++result.decisions;
        }
    if (result.decisions > 0)
        for (std::size_t a = 0; a < kNumActions; ++a)
            result.shares[a] = static_cast<double>(result.counts[a]) / static_cast<double>(result.decisions);
    return result;
}

std::vector<TurnMean> per_turn_curve(std::span<const Trajectory> logs)
{
    auto sums = std::vector<double> {};
    auto counts = std::vector<std::size_t> {};
    for (auto const& trajectory: logs)
        for (auto const& turn: trajectory.turns)
        {
            if (!turn.feedback)
                continue;
            auto const slot = static_cast<std::size_t>(turn.turn_index - 1);
            if (slot >= sums.size())
            {
                sums.resize(slot + 1, 0.0);
                counts.resize(slot + 1, 0);
            }
            sums[slot] += turn.feedback->score;
            ++counts[slot];
        }

    auto curve = std::vector<TurnMean> {};
    for (std::size_t i = 0; i < sums.size(); ++i)
        if (counts[i] > 0)
            curve.push_back(TurnMean {.turn = static_cast<int>(i + 1), .mean = sums[i] / counts[i],
                                      .count = counts[i]});
    return curve;
}

double avg_turns(std::span<const Trajectory> logs)
{
    require_logs(logs, "avg_turns");
    auto total = 0.0;
    for (auto const& trajectory: logs)
        total += static_cast<double>(trajectory.num_candidates());
    return total / static_cast<double>(logs.size());
}

BestVsFinal best_vs_final(std::span<const Trajectory> logs)
{
    require_logs(logs, "best_vs_final");
    auto result = BestVsFinal {};
    for (auto const& trajectory: logs)
    {
        auto const scores = score_sequence(trajectory);
        result.mean_best += *std::max_element(scores.begin(), scores.end());
        result.mean_final += scores.back();
    }
    auto const n = static_cast<double>(logs.size());
    result.mean_best /= n;
    result.mean_final /= n;
    result.delta = result.mean_best - result.mean_final;
    return result;
}

PeakGap peak_gap(std::span<const Trajectory> logs, double rho_max)
{
    require_logs(logs, "peak_gap");
    auto result = PeakGap {};
    for (auto const& trajectory: logs)
    {
        auto const scores = score_sequence(trajectory);
        auto const peak = std::clamp(*std::max_element(scores.begin(), scores.end()) / rho_max, 0.0, 1.0);
        auto const retention = std::clamp(scores.back() / rho_max, 0.0, 1.0);
        result.mean_peak += peak;
        result.mean_gap += peak - retention;
    }
    auto const n = static_cast<double>(logs.size());
    result.mean_peak /= n;
    result.mean_gap /= n;
    return result;
}

Agreement reviewer_human_agreement(std::span<const JudgedPair> pairs, double tie_margin)
{
    auto result = Agreement {};
    for (auto const& pair: pairs)
    {
        if (!std::isfinite(pair.rho_a) || !std::isfinite(pair.rho_b))
            throw InputError("reviewer_human_agreement: non-finite score");
        // a gap equal to the margin up to rounding of the inputs is decisive
        if (std::abs(pair.rho_a - pair.rho_b) < tie_margin - kMarginSlack)
        {
            ++result.reviewer_ties;
            continue;
        }
        if (pair.human == Preference::Tie)
        {
            ++result.human_ties;
            continue;
        }
        auto const reviewer = pair.rho_a > pair.rho_b ? Preference::A : Preference::B;
        ++result.decisive;
        if (reviewer == pair.human)
            ++result.agreements;
    }
    if (result.decisive > 0)
        result.rate = static_cast<double>(result.agreements) / static_cast<double>(result.decisive);
    return result;
}

LatencyReport latency_account(std::span<const Trajectory> logs, const CostModel& costs)
{
    auto result = LatencyReport {};
    auto const perCandidate = costs.generation + costs.review + costs.decision;
    for (auto const& trajectory: logs)
        for (auto const& turn: trajectory.turns)
        {
            auto const slot = static_cast<std::size_t>(turn.turn_index - 1);
            if (slot >= result.per_turn.size())
                result.per_turn.resize(slot + 1, 0.0);
            auto const cost = turn.produces_candidate() ? perCandidate : costs.decision;
            result.per_turn[slot] += cost;
            result.total += cost;
        }
    if (!logs.empty())
        result.mean_per_trajectory = result.total / static_cast<double>(logs.size());
    return result;
}

StopRate correct_stop_rate(std::span<const Trajectory> logs, double threshold)
{
    auto result = StopRate {};
    for (auto const& trajectory: logs)
    {
        auto const scores = score_sequence(trajectory);
        auto const first = std::find_if(scores.begin(), scores.end(), [&](double s) { return s >= threshold; });
        if (first == scores.end())
            continue;
        ++result.eligible;
        auto const reachedAt = static_cast<int>(first - scores.begin()) + 1;
        auto const endedThere = reachedAt == static_cast<int>(scores.size())
                                && (trajectory.terminated_by == Termination::StopAction
                                    || reachedAt == trajectory.t_max);
        if (endedThere)
            ++result.correct;
    }
    if (result.eligible > 0)
        result.rate = static_cast<double>(result.correct) / static_cast<double>(result.eligible);
    return result;
}

} // namespace gennav::metrics
