// SPDX-License-Identifier: Apache-2.0
#include "gennav/policy.hpp"

#include "gennav/error.hpp"
#include "gennav/serialize.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace gennav::policy
{

Eigen::Matrix<double, kNumFeatures, 1> StateFeatures::vector() const
{
    auto v = Eigen::Matrix<double, kNumFeatures, 1> {};
    v << current_score_norm, turn_frac, score_delta, prompt_difficulty, bias;
    return v;
}

bool StateFeatures::finite() const
{
    return vector().allFinite();
}

StateFeatures extract_features(const PromptSpec& prompt, std::span<const TurnRecord> history, int turn, int t_max)
{
    auto scores = std::vector<double> {};
    for (auto const& record: history)
        if (record.feedback)
            scores.push_back(std::clamp(record.feedback->score / kRhoMax, 0.0, 1.0));

    auto features = StateFeatures {};
    features.prompt_difficulty = prompt.difficulty;
    features.turn_frac = t_max > 0 ? std::clamp(static_cast<double>(turn - 1) / t_max, 0.0, 1.0) : 0.0;
    if (!scores.empty())
        features.current_score_norm = scores.back();
    if (scores.size() >= 2)
        features.score_delta = std::clamp(scores.back() - scores[scores.size() - 2], -1.0, 1.0);
    return features;
}

ActionProbs action_distribution(const PolicyParams& params, const StateFeatures& features, int turn)
{
    if (turn < 1)
        throw Error("turn index must be >= 1");
    if (!features.finite())
        throw Error("non-finite state features");

    if (turn == 1)
        return ActionProbs {0.0, 0.0, 1.0};

    auto const logits = (params.weights * features.vector()).eval();
    auto const top = logits.maxCoeff();
    auto probs = ActionProbs {};
    auto total = 0.0;
    for (std::size_t a = 0; a < kNumActions; ++a)
    {
        probs[a] = std::exp(logits(static_cast<int>(a)) - top);
        total += probs[a];
    }
    for (auto& p: probs)
        p /= total;
    return probs;
}

double log_prob(const PolicyParams& params, const StateFeatures& features, int turn, ActionChoice choice)
{
    if (turn == 1)
        return choice == ActionChoice::Regenerate ? 0.0 : -std::numeric_limits<double>::infinity();
    if (!features.finite())
        throw Error("non-finite state features");
    auto const logits = (params.weights * features.vector()).eval();
    auto const top = logits.maxCoeff();
    auto const lse = top + std::log((logits.array() - top).exp().sum());
    return logits(static_cast<int>(index_of(choice))) - lse;
}

WeightMatrix log_prob_gradient(const PolicyParams& params, const StateFeatures& features, int turn,
                               ActionChoice choice)
{
    auto const probs = action_distribution(params, features, turn);
    if (probs[index_of(choice)] <= 0.0)
        throw Error("log-prob gradient requested for masked action " + std::string(to_string(choice)));
    if (turn == 1)
        return WeightMatrix::Zero();

    auto coefficient = Eigen::Matrix<double, kNumActions, 1> {};
    for (std::size_t a = 0; a < kNumActions; ++a)
        coefficient(static_cast<int>(a)) = (a == index_of(choice) ? 1.0 : 0.0) - probs[a];
    return coefficient * features.vector().transpose();
}

namespace
{

ActionRecord make_action(ActionChoice choice, std::string_view prompt_id, int turn)
{
    switch (choice)
    {
        case ActionChoice::Stop: return ActionRecord::stop();
        case ActionChoice::Refine: return ActionRecord::refine(env::placeholder_prompt(prompt_id, turn, choice));
        case ActionChoice::Regenerate:
            return ActionRecord::regenerate(env::placeholder_prompt(prompt_id, turn, choice));
    }
    throw Error("unknown action choice");
}

} // namespace

ActionRecord sample_action(const PolicyParams& params, const StateFeatures& features, int turn, Rng& rng,
                           std::string_view prompt_id)
{
    auto const probs = action_distribution(params, features, turn);
    auto const index = rng.categorical(probs);
    return make_action(kAllActions[index], prompt_id, turn);
}

ActionRecord sample_action(const PolicyParams& params, const StateFeatures& features, int turn,
                           std::uint64_t seed, std::string_view prompt_id)
{
    auto rng = Rng(seed);
    return sample_action(params, features, turn, rng, prompt_id);
}

ActionRecord heuristic_policy(const StateFeatures& features, const HeuristicThresholds& thresholds,
                              std::string_view prompt_id, int turn)
{
    if (turn < 2)
        throw Error("the heuristic policy decides from turn 2 on");
    auto const score = features.current_score_norm;
    if (score >= thresholds.high / kRhoMax)
        return ActionRecord::stop();
    if (score >= thresholds.mid / kRhoMax)
        return make_action(ActionChoice::Refine, prompt_id, turn);
    return make_action(ActionChoice::Regenerate, prompt_id, turn);
}

PolicyParams fit_heuristic_params(const HeuristicThresholds& thresholds, int t_max, double sharpness)
{
    constexpr auto kScoreSteps = 41;
    constexpr auto kAuxSteps = 5;
    auto const lastTurn = std::max(t_max, 2);
    auto const rows = kScoreSteps * (lastTurn - 1) * kAuxSteps * kAuxSteps;

    auto design = Eigen::MatrixXd(rows, static_cast<int>(kNumFeatures));
    auto targets = Eigen::MatrixXd(rows, static_cast<int>(kNumActions));
    auto row = 0;
    for (auto i = 0; i < kScoreSteps; ++i)
    {
        auto const s = static_cast<double>(i) / (kScoreSteps - 1);
        for (auto turn = 2; turn <= lastTurn; ++turn)
            for (auto j = 0; j < kAuxSteps; ++j)
                for (auto k = 0; k < kAuxSteps; ++k)
                {
                    auto const f = StateFeatures {
                        .current_score_norm = s,
                        .turn_frac = static_cast<double>(turn - 1) / lastTurn,
                        .score_delta = -0.5 + static_cast<double>(j) / (kAuxSteps - 1),
                        .prompt_difficulty = static_cast<double>(k) / (kAuxSteps - 1),
                        .bias = 1.0,
                    };
                    design.row(row) = f.vector().transpose();
                    targets(row, 0) = sharpness * (s - thresholds.high / kRhoMax);
                    targets(row, 1) = 0.0;
                    targets(row, 2) = sharpness * (thresholds.mid / kRhoMax - s);
                    ++row;
                }
    }

    auto const solution = design.colPivHouseholderQr().solve(targets).eval(); // features x actions
    auto params = PolicyParams {};
    params.weights = solution.transpose();
    // exact targets leave numerical dust in the unused columns
    params.weights = params.weights.unaryExpr([](double w) { return std::abs(w) < 1e-12 ? 0.0 : w; });
    return params;
}

namespace
{

constexpr auto kParamsHeader = std::string_view("gennav-policy v1");

} // namespace

void save_params(const PolicyParams& params, std::ostream& out)
{
    out << "# rows: STOP REFINE REGENERATE\n"
        << "# cols: current_score_norm turn_frac score_delta prompt_difficulty bias\n"
        << kParamsHeader << ' ' << kNumActions << ' ' << kNumFeatures << '\n';
    for (int a = 0; a < params.weights.rows(); ++a)
    {
        for (int f = 0; f < params.weights.cols(); ++f)
            out << (f ? " " : "") << io::format_double(params.weights(a, f));
        out << '\n';
    }
}

PolicyParams load_params(std::istream& in)
{
    auto line = std::string {};
    auto headerSeen = false;
    auto params = PolicyParams {};
    auto row = 0;
    while (std::getline(in, line))
    {
        if (line.empty() || line.front() == '#')
            continue;
        if (!headerSeen)
        {
            auto expected = std::string(kParamsHeader) + " " + std::to_string(kNumActions) + " "
                            + std::to_string(kNumFeatures);
            if (line != expected)
                throw InputError("policy parameter file: expected header '" + expected + "'");
            headerSeen = true;
            continue;
        }
        if (row >= static_cast<int>(kNumActions))
            throw InputError("policy parameter file: too many rows");

        auto fields = std::istringstream(line);
        auto token = std::string {};
        auto col = 0;
        while (fields >> token)
        {
            if (col >= static_cast<int>(kNumFeatures))
                throw InputError("policy parameter file: too many columns in row " + std::to_string(row + 1));
            auto value = 0.0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc {} || ptr != token.data() + token.size())
                throw InputError("policy parameter file: bad number '" + token + "'");
            params.weights(row, col++) = value;
        }
        if (col != static_cast<int>(kNumFeatures))
            throw InputError("policy parameter file: row " + std::to_string(row + 1) + " needs "
                             + std::to_string(kNumFeatures) + " values");
        ++row;
    }
    if (!headerSeen || row != static_cast<int>(kNumActions))
        throw InputError("policy parameter file: expected header and " + std::to_string(kNumActions) + " rows");
    if (!params.finite())
        throw InputError("policy parameter file: non-finite weight");
    return params;
}

void save_params_file(const PolicyParams& params, const std::string& path)
{
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open output file: " + path);
    save_params(params, out);
}

PolicyParams load_params_file(const std::string& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open input file: " + path);
    return load_params(in);
}

ActionRecord SoftmaxNavigator::act(const env::DecisionContext& context, Rng& rng) const
{
    auto const features = extract_features(context.prompt, context.history, context.turn, context.t_max);
    return sample_action(_params, features, context.turn, rng, context.prompt.id);
}

ActionRecord HeuristicNavigator::act(const env::DecisionContext& context, Rng&) const
{
    auto const features = extract_features(context.prompt, context.history, context.turn, context.t_max);
    return heuristic_policy(features, _thresholds, context.prompt.id, context.turn);
}

ActionRecord FixedWorkflowNavigator::act(const env::DecisionContext& context, Rng&) const
{
    switch (_workflow)
    {
        case Workflow::OneShot: return ActionRecord::stop();
        case Workflow::RefineOnly: return make_action(ActionChoice::Refine, context.prompt.id, context.turn);
        case Workflow::RegenerateOnly:
            return make_action(ActionChoice::Regenerate, context.prompt.id, context.turn);
    }
    throw Error("unknown workflow");
}

std::string_view to_string(BranchOutcome outcome)
{
    switch (outcome)
    {
        case BranchOutcome::RefineWins: return "REFINE";
        case BranchOutcome::RegenerateWins: return "REGENERATE";
        case BranchOutcome::Tie: return "TIE";
    }
    return "UNKNOWN";
}

PreferenceRollout preference_reference(const env::Environment& environment, const PromptSpec& prompt, int t_max,
                                       const Rng& rng, double tie_margin)
{
    if (t_max < 1)
        throw InputError("t_max must be >= 1");

    auto rollout = PreferenceRollout {};
    auto& trajectory = rollout.trajectory;
    trajectory = Trajectory {.prompt = prompt, .turns = {}, .t_max = t_max,
                             .terminated_by = Termination::BudgetExhausted};

    {
        auto streams = env::TurnStreams::for_turn(rng, 1);
        auto action = make_action(ActionChoice::Regenerate, prompt.id, 1);
        auto candidate = environment.generate(prompt, action, 1, streams.generator);
        auto feedback = environment.review(prompt, candidate, streams.reviewer);
        trajectory.turns.push_back(TurnRecord {.turn_index = 1, .action = std::move(action),
                                               .candidate = std::move(candidate), .feedback = std::move(feedback)});
    }

    for (auto turn = 2; turn <= t_max; ++turn)
    {
        auto streams = env::TurnStreams::for_turn(rng, turn);
        auto const& current = *trajectory.turns.back().candidate;

        auto refineAction = make_action(ActionChoice::Refine, prompt.id, turn);
        auto refineGen = streams.generator.split(1);
        auto refineRev = streams.reviewer.split(1);
        auto refined = environment.refine(prompt, current, refineAction, turn, refineGen);
        auto refinedFeedback = environment.review(prompt, refined, refineRev);

        auto regenAction = make_action(ActionChoice::Regenerate, prompt.id, turn);
        auto regenGen = streams.generator.split(2);
        auto regenRev = streams.reviewer.split(2);
        auto regenerated = environment.generate(prompt, regenAction, turn, regenGen);
        auto regeneratedFeedback = environment.review(prompt, regenerated, regenRev);

        auto const diff = refinedFeedback.score - regeneratedFeedback.score;
        auto const tie = diff == 0.0 || std::abs(diff) < tie_margin;
        auto const outcome = tie ? BranchOutcome::Tie
                                 : (diff > 0.0 ? BranchOutcome::RefineWins : BranchOutcome::RegenerateWins);
        rollout.outcomes.push_back(outcome);

        if (outcome == BranchOutcome::RegenerateWins)
            trajectory.turns.push_back(TurnRecord {.turn_index = turn, .action = std::move(regenAction),
                                                   .candidate = std::move(regenerated),
                                                   .feedback = std::move(regeneratedFeedback)});
        else
            trajectory.turns.push_back(TurnRecord {.turn_index = turn, .action = std::move(refineAction),
                                                   .candidate = std::move(refined),
                                                   .feedback = std::move(refinedFeedback)});
    }
    return rollout;
}

} // namespace gennav::policy
