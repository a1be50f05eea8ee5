// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gennav {

/// Reviewer score ceiling on the 0-5 scale.
inline constexpr double kRhoMax = 5.0;

/// Weights used to aggregate the reviewer's two sub-scores.
inline constexpr double kVisualWeight = 0.3;
inline constexpr double kInstructionWeight = 0.7;

enum class ActionChoice
{
    Stop = 0,
    Refine = 1,
    Regenerate = 2,
};

inline constexpr std::size_t kNumActions = 3;
inline constexpr std::array<ActionChoice, kNumActions> kAllActions {
    ActionChoice::Stop, ActionChoice::Refine, ActionChoice::Regenerate};

std::string_view to_string(ActionChoice choice);
std::optional<ActionChoice> parse_action_choice(std::string_view text);

constexpr std::size_t index_of(ActionChoice choice)
{
    return static_cast<std::size_t>(choice);
}

struct PromptSpec
{
    std::string id;
    std::string text;
    double difficulty = 0.0;
    std::vector<std::string> tags;

    /// Throws InputError when text is empty or difficulty leaves [0,1].
    void validate() const;

    bool operator==(const PromptSpec&) const = default;
};

/// A navigator action: the discrete choice plus the revised prompt that goes with it.
///
/// Well-formed records satisfy: STOP carries no prompt, REFINE/REGENERATE carry a
/// non-empty one. Malformed records can only be produced by `parse`, which keeps
/// whatever it could recover and clears `well_formed`.
struct ActionRecord
{
    ActionChoice choice = ActionChoice::Regenerate;
    std::optional<std::string> revised_prompt;
    bool well_formed = true;

    static ActionRecord stop();
    static ActionRecord refine(std::string prompt);
    static ActionRecord regenerate(std::string prompt);

    /// Builds a record from raw navigator output. An unknown decision falls back to
    /// REGENERATE; a missing/extra prompt is tolerated. Either marks the record malformed.
    static ActionRecord parse(std::string_view decision, std::optional<std::string> revised_prompt);

    bool operator==(const ActionRecord&) const = default;
};

struct Candidate
{
    std::string id;
    /// Hidden simulation state. Absent for candidates produced by live services.
    std::optional<double> latent_quality;
    std::string payload_ref;

    bool operator==(const Candidate&) const = default;
};

double aggregate_score(double visual, double instruction);

struct ReviewerFeedback
{
    double visual = 0.0;
    double instruction = 0.0;
    double score = 0.0;
    std::string diagnosis;

    /// Clamps both sub-scores to [0,5] and aggregates them.
    static ReviewerFeedback from_subscores(double visual, double instruction, std::string diagnosis);

    bool operator==(const ReviewerFeedback&) const = default;
};

struct TurnRecord
{
    int turn_index = 1;
    ActionRecord action;
    std::optional<Candidate> candidate;
    std::optional<ReviewerFeedback> feedback;

    bool produces_candidate() const { return candidate.has_value(); }

    bool operator==(const TurnRecord&) const = default;
};

enum class Termination
{
    StopAction,
    BudgetExhausted,
};

std::string_view to_string(Termination termination);
std::optional<Termination> parse_termination(std::string_view text);

struct Trajectory
{
    PromptSpec prompt;
    std::vector<TurnRecord> turns;
    int t_max = 1;
    Termination terminated_by = Termination::BudgetExhausted;

    /// Number of candidate-producing turns (T).
    std::size_t num_candidates() const;

    /// Checks every structural invariant; throws InputError with the violated rule.
    void validate() const;

    bool operator==(const Trajectory&) const = default;
};

struct RolloutGroup
{
    PromptSpec prompt;
    std::vector<Trajectory> trajectories;
    /// Behaviour-policy log-probabilities, one row per trajectory, one entry per turn.
    std::vector<std::vector<double>> old_log_probs;
};

/// Reviewer scores of the candidate-producing turns, in turn order.
std::vector<double> score_sequence(const Trajectory& trajectory);

struct Selection
{
    int turn_index = 1;
    Candidate candidate;
    double score = 0.0;
};

/// Best-score output selection; ties go to the earliest turn.
Selection select_output(const Trajectory& trajectory);

} // namespace gennav
