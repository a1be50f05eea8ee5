// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/env.hpp"
#include "gennav/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace gennav::policy {

inline constexpr std::size_t kNumFeatures = 5;

/// Navigator state summary. Built from the prompt and reviewer history only; the
/// simulator's hidden latent quality never reaches these fields.
struct StateFeatures
{
    double current_score_norm = 0.0; ///< latest reviewer score / rho_max
    double turn_frac = 0.0;          ///< (t-1)/t_max
    double score_delta = 0.0;        ///< change of the normalized score over the last turn
    double prompt_difficulty = 0.0;
    double bias = 1.0;

    Eigen::Matrix<double, kNumFeatures, 1> vector() const;
    bool finite() const;
};

StateFeatures extract_features(const PromptSpec& prompt, std::span<const TurnRecord> history, int turn, int t_max);

using WeightMatrix = Eigen::Matrix<double, static_cast<int>(kNumActions), static_cast<int>(kNumFeatures)>;
using ActionProbs = std::array<double, kNumActions>;

/// Softmax-linear policy weights, rows = {STOP, REFINE, REGENERATE}.
struct PolicyParams
{
    WeightMatrix weights = WeightMatrix::Zero();

    bool finite() const { return weights.allFinite(); }
    bool operator==(const PolicyParams& other) const { return weights == other.weights; }
};

/// Masked softmax over actions. At t = 1 all mass goes to REGENERATE.
ActionProbs action_distribution(const PolicyParams& params, const StateFeatures& features, int turn);

double log_prob(const PolicyParams& params, const StateFeatures& features, int turn, ActionChoice choice);

/// d log pi(choice) / d weights = (onehot(choice) - pi) outer features.
WeightMatrix log_prob_gradient(const PolicyParams& params, const StateFeatures& features, int turn,
                               ActionChoice choice);

ActionRecord sample_action(const PolicyParams& params, const StateFeatures& features, int turn, Rng& rng,
                           std::string_view prompt_id);
ActionRecord sample_action(const PolicyParams& params, const StateFeatures& features, int turn,
                           std::uint64_t seed, std::string_view prompt_id);

struct HeuristicThresholds
{
    double high = 4.5; ///< stop at or above (raw score)
    double mid = 3.0;  ///< refine at or above, regenerate below
};

ActionRecord heuristic_policy(const StateFeatures& features, const HeuristicThresholds& thresholds,
                              std::string_view prompt_id, int turn);

/// Least-squares fit of the softmax weights to the heuristic's threshold margins:
/// target logits STOP = k*(s - high/5), REFINE = 0, REGENERATE = k*(mid/5 - s).
PolicyParams fit_heuristic_params(const HeuristicThresholds& thresholds, int t_max, double sharpness);

/// Plain-text parameter file: header line, then one row per action.
void save_params(const PolicyParams& params, std::ostream& out);
PolicyParams load_params(std::istream& in);
void save_params_file(const PolicyParams& params, const std::string& path);
PolicyParams load_params_file(const std::string& path);

class SoftmaxNavigator final : public env::Navigator
{
public:
    explicit SoftmaxNavigator(PolicyParams params): _params(std::move(params)) {}

    const PolicyParams& params() const { return _params; }
    ActionRecord act(const env::DecisionContext& context, Rng& rng) const override;

private:
    PolicyParams _params;
};

/// Training-free state-conditioned agent.
class HeuristicNavigator final : public env::Navigator
{
public:
    explicit HeuristicNavigator(HeuristicThresholds thresholds = {}): _thresholds(thresholds) {}

    ActionRecord act(const env::DecisionContext& context, Rng& rng) const override;

private:
    HeuristicThresholds _thresholds;
};

enum class Workflow
{
    OneShot,
    RefineOnly,
    RegenerateOnly,
};

/// Fixed workflows that ignore the state.
class FixedWorkflowNavigator final : public env::Navigator
{
public:
    explicit FixedWorkflowNavigator(Workflow workflow): _workflow(workflow) {}

    ActionRecord act(const env::DecisionContext& context, Rng& rng) const override;

private:
    Workflow _workflow;
};

enum class BranchOutcome
{
    RefineWins,
    RegenerateWins,
    Tie,
};

std::string_view to_string(BranchOutcome outcome);

struct PreferenceRollout
{
    Trajectory trajectory;
    std::vector<BranchOutcome> outcomes; ///< one per turn >= 2
};

/// Runs REFINE and REGENERATE side by side at every turn >= 2 and continues from the
/// higher-scoring branch. Scores within `tie_margin` (or exactly equal) count as a tie;
/// ties keep the refined image.
PreferenceRollout preference_reference(const env::Environment& environment, const PromptSpec& prompt, int t_max,
                                       const Rng& rng, double tie_margin = 0.0);

} // namespace gennav::policy
