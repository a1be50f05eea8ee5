// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/error.hpp"
#include "gennav/rng.hpp"
#include "gennav/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gennav::env {

/// Piecewise-linear map through sorted knots, flat beyond the end knots.
class PiecewiseLinear
{
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> knots);

    double operator()(double x) const;
    const std::vector<std::pair<double, double>>& knots() const { return _knots; }

    /// "x:y,x:y,..." (the config-file encoding)
    static PiecewiseLinear parse(std::string_view text);
    std::string format() const;

private:
    std::vector<std::pair<double, double>> _knots;
};

/// Parameters of the simulated generator + reviewer.
///
/// Initial quality is drawn around an affine function of prompt difficulty.
/// Refinement adds a quality-dependent gain: positive for mid-quality images and
/// negative past the degradation knee, where edits tend to damage a good image.
struct SimEnvConfig
{
    double base_intercept = 1.0;
    double base_slope = -0.6;
    double regen_std = 0.10;
    PiecewiseLinear refine_gain {{{0.0, -0.05}, {0.3, 0.0}, {0.55, 0.2}, {0.8, 0.05}, {0.85, 0.0}, {1.0, -0.4}}};
    double refine_std = 0.06;
    double reviewer_noise_std = 0.05;
    std::uint64_t seed = 0;

    double base_quality_mean(double difficulty) const { return base_intercept + base_slope * difficulty; }
    void validate() const;
};

/// Generator and reviewer as seen by the navigator loop.
class Environment
{
public:
    virtual ~Environment() = default;

    /// Text-to-image from scratch (REGENERATE and the first turn).
    virtual Candidate generate(const PromptSpec& prompt, const ActionRecord& action, int turn, Rng& rng) const = 0;
    /// Image-to-image edit of `current` (REFINE).
    virtual Candidate refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord& action, int turn,
                             Rng& rng) const = 0;
    virtual ReviewerFeedback review(const PromptSpec& prompt, const Candidate& candidate, Rng& rng) const = 0;
};

class SimEnvironment final : public Environment
{
public:
    explicit SimEnvironment(SimEnvConfig config);

    const SimEnvConfig& config() const { return _config; }

    Candidate generate(const PromptSpec& prompt, const ActionRecord& action, int turn, Rng& rng) const override;
    Candidate refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord& action, int turn,
                     Rng& rng) const override;
    ReviewerFeedback review(const PromptSpec& prompt, const Candidate& candidate, Rng& rng) const override;

private:
    SimEnvConfig _config;
};

/// What the navigator sees when choosing the action for `turn` (t >= 2).
struct DecisionContext
{
    const PromptSpec& prompt;
    std::span<const TurnRecord> history;
    int turn;
    int t_max;
};

class Navigator
{
public:
    virtual ~Navigator() = default;

    /// Turn-1 action: rewrite the original prompt for text-to-image generation.
    virtual ActionRecord initial_action(const PromptSpec& prompt) const;
    virtual ActionRecord act(const DecisionContext& context, Rng& rng) const = 0;
};

/// Placeholder revised prompt used in simulation, e.g. "p17/t2/refine".
std::string placeholder_prompt(std::string_view prompt_id, int turn, ActionChoice choice);

/// Raised when the environment fails mid-episode; carries the turns completed so far.
class EpisodeError : public Error
{
public:
    EpisodeError(const std::string& what, int turn, Trajectory partial);

    int turn() const { return _turn; }
    const Trajectory& partial() const { return _partial; }

private:
    int _turn;
    Trajectory _partial;
};

/// Runs one navigator episode: turn 1 generates, later turns follow the navigator
/// until STOP or until t_max candidates exist.
Trajectory run_episode(const Navigator& navigator, const Environment& environment, const PromptSpec& prompt,
                       int t_max, const Rng& rng);

/// Per-turn streams used by run_episode and friends.
struct TurnStreams
{
    Rng action;
    Rng generator;
    Rng reviewer;

    static TurnStreams for_turn(const Rng& episode, int turn);
};

/// Synthetic prompt pool with difficulty ~ U(0,1).
std::vector<PromptSpec> synthetic_prompt_pool(std::size_t count, std::uint64_t seed);

/// Prompt pool from line-delimited JSON records {id, text, difficulty, tags}.
std::vector<PromptSpec> load_prompt_pool(const std::string& path);

} // namespace gennav::env
