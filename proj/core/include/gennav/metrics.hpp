// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gennav::metrics {

/// Action shares over decision turns (t >= 2); the forced first generation is excluded.
struct ActionShares
{
    std::array<double, kNumActions> shares {}; ///< indexed by index_of(ActionChoice)
    std::array<std::size_t, kNumActions> counts {};
    std::size_t decisions = 0;

    double share(ActionChoice choice) const { return shares[index_of(choice)]; }
};

ActionShares action_distribution(std::span<const Trajectory> logs);

struct TurnMean
{
    int turn = 1;
    double mean = 0.0;
    std::size_t count = 0; ///< trajectories with a candidate at this turn
};

/// Mean reviewer score per turn index, over the trajectories that reach that turn.
std::vector<TurnMean> per_turn_curve(std::span<const Trajectory> logs);

/// Mean number of generated candidates per trajectory.
double avg_turns(std::span<const Trajectory> logs);

struct BestVsFinal
{
    double mean_best = 0.0;
    double mean_final = 0.0;
    double delta = 0.0;
};

BestVsFinal best_vs_final(std::span<const Trajectory> logs);

/// Mean normalized peak and peak-minus-retention gap.
struct PeakGap
{
    double mean_peak = 0.0;
    double mean_gap = 0.0;
};

PeakGap peak_gap(std::span<const Trajectory> logs, double rho_max = kRhoMax);

enum class Preference
{
    A,
    B,
    Tie,
};

struct JudgedPair
{
    double rho_a = 0.0;
    double rho_b = 0.0;
    Preference human = Preference::Tie;
};

struct Agreement
{
    double rate = 0.0;          ///< agreements / decisive (0 when nothing is decisive)
    std::size_t decisive = 0;   ///< reviewer and human both expressed a preference
    std::size_t agreements = 0;
    std::size_t reviewer_ties = 0;
    std::size_t human_ties = 0; ///< human tie on a reviewer-decisive pair
};

/// Reviewer preference is a tie when |rho_a - rho_b| < tie_margin.
Agreement reviewer_human_agreement(std::span<const JudgedPair> pairs, double tie_margin = 0.3);

struct CostModel
{
    double generation = 0.0;
    double review = 0.0;
    double decision = 0.0;
};

struct LatencyReport
{
    double total = 0.0;
    double mean_per_trajectory = 0.0;
    std::vector<double> per_turn; ///< summed cost by turn index (index 0 = turn 1)
};

/// Every candidate turn costs generation + review + decision; a trailing STOP costs one decision.
LatencyReport latency_account(std::span<const Trajectory> logs, const CostModel& costs);

struct StopRate
{
    double rate = 0.0;
    std::size_t eligible = 0; ///< trajectories whose score reached the threshold
    std::size_t correct = 0;  ///< ... and that ended at the first such turn
};

/// Diagnostic: among trajectories reaching `threshold`, the share that stopped right there.
StopRate correct_stop_rate(std::span<const Trajectory> logs, double threshold);

} // namespace gennav::metrics
