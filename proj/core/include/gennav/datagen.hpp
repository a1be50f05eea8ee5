// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/env.hpp"
#include "gennav/rng.hpp"
#include "gennav/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gennav::datagen {

/// Proposes the K candidate actions of one turn, conditioned on the selected path only.
class Proposer
{
public:
    virtual ~Proposer() = default;

    virtual std::vector<ActionRecord> propose(const PromptSpec& prompt, std::span<const TurnRecord> path, int turn,
                                              int k, Rng& rng) const = 0;
};

/// Turn 1: K regenerations. Later turns: each branch is REFINE with probability
/// `refine_share`, else REGENERATE. Revised prompts are branch-specific placeholders.
class SimProposer final : public Proposer
{
public:
    explicit SimProposer(double refine_share = 0.5);

    std::vector<ActionRecord> propose(const PromptSpec& prompt, std::span<const TurnRecord> path, int turn, int k,
                                      Rng& rng) const override;

private:
    double _refine_share;
};

struct BranchEntry
{
    ActionRecord action;
    Candidate candidate;
    ReviewerFeedback feedback;

    bool operator==(const BranchEntry&) const = default;
};

struct ExpandedTurn
{
    int turn = 1;
    std::vector<BranchEntry> branches;
    std::size_t selected = 0; ///< argmax of the branch scores, lowest index on ties

    const BranchEntry& best() const { return branches.at(selected); }
    bool operator==(const ExpandedTurn&) const = default;
};

enum class StopReason
{
    Threshold,
    NoImprovement,
    Budget,
};

std::string_view to_string(StopReason reason);
std::optional<StopReason> parse_stop_reason(std::string_view text);

struct BranchLog
{
    PromptSpec prompt;
    int k = 1;
    int t_max = 1;
    double rho_thr = 4.5;
    std::vector<ExpandedTurn> tree;
    std::size_t path_length = 0; ///< the selected path is tree[0..path_length) at their best branch
    StopReason stop_reason = StopReason::Budget;

    std::vector<double> path_scores() const;
    /// Selected path as a trajectory; ends with STOP when it stopped before the budget.
    Trajectory path_trajectory() const;

    bool operator==(const BranchLog&) const = default;
};

/// Branch-and-select construction. Stops when the best branch reaches rho_thr, fails to
/// beat the best score so far, or the budget is spent. A non-improving final turn stays
/// in the tree but not on the selected path.
BranchLog branch_and_select(const Proposer& proposer, const env::Environment& environment, const PromptSpec& prompt,
                            int k, int t_max, double rho_thr, const Rng& rng);

enum class FilterRule
{
    NotStrictlyIncreasing,
    PeakTooLow,
};

std::string_view to_string(FilterRule rule);

/// The first rule a score sequence violates, if any. Keep iff strictly increasing and max > min_peak.
std::optional<FilterRule> check_scores(std::span<const double> scores, double min_peak = 4.5);

struct FilterStats
{
    std::size_t kept = 0;
    std::size_t not_increasing = 0;
    std::size_t peak_too_low = 0;
};

struct FilterResult
{
    std::vector<BranchLog> kept;
    std::vector<std::pair<std::string, FilterRule>> rejected; ///< prompt id, rule
    FilterStats stats;
};

FilterResult filter_trajectories(std::span<const BranchLog> logs, double min_peak = 4.5);

struct ConversationTurn
{
    int turn = 1;
    std::string state;                       ///< short summary of the selected history
    std::optional<ReviewerFeedback> feedback; ///< feedback on the previous selected image
    ActionRecord target;

    bool operator==(const ConversationTurn&) const = default;
};

struct ConversationRecord
{
    PromptSpec prompt;
    std::vector<ConversationTurn> turns;

    bool operator==(const ConversationRecord&) const = default;
};

ConversationRecord to_conversation(const BranchLog& log);
std::vector<ConversationRecord> export_conversational(std::span<const BranchLog> kept);

std::string encode_conversation(const ConversationRecord& record);
ConversationRecord decode_conversation(std::string_view line);

std::string encode_branch_log(const BranchLog& log);
BranchLog decode_branch_log(std::string_view line);

} // namespace gennav::datagen
