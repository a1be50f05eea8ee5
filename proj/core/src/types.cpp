// SPDX-License-Identifier: Apache-2.0
#include "gennav/types.hpp"

#include "gennav/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace gennav
{

std::string_view to_string(ActionChoice choice)
{
    switch (choice)
    {
        case ActionChoice::Stop: return "STOP";
        case ActionChoice::Refine: return "REFINE";
        case ActionChoice::Regenerate: return "REGENERATE";
    }
    return "UNKNOWN";
}

std::optional<ActionChoice> parse_action_choice(std::string_view text)
{
    auto upper = std::string(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (auto choice: kAllActions)
        if (upper == to_string(choice))
            return choice;
    return std::nullopt;
}

void PromptSpec::validate() const
{
    if (text.empty())
        throw InputError("prompt '" + id + "': text must be non-empty");
    if (!(difficulty >= 0.0 && difficulty <= 1.0))
        throw InputError("prompt '" + id + "': difficulty must lie in [0,1]");
}

ActionRecord ActionRecord::stop()
{
    return ActionRecord {.choice = ActionChoice::Stop, .revised_prompt = std::nullopt, .well_formed = true};
}

ActionRecord ActionRecord::refine(std::string prompt)
{
    auto ok = !prompt.empty();
    return ActionRecord {.choice = ActionChoice::Refine, .revised_prompt = std::move(prompt), .well_formed = ok};
}

ActionRecord ActionRecord::regenerate(std::string prompt)
{
    auto ok = !prompt.empty();
    return ActionRecord {.choice = ActionChoice::Regenerate, .revised_prompt = std::move(prompt), .well_formed = ok};
}

ActionRecord ActionRecord::parse(std::string_view decision, std::optional<std::string> revised_prompt)
{
    auto record = ActionRecord {};
    auto parsed = parse_action_choice(decision);
    record.choice = parsed.value_or(ActionChoice::Regenerate);
    record.revised_prompt = std::move(revised_prompt);

    auto const hasPrompt = record.revised_prompt.has_value() && !record.revised_prompt->empty();
    auto const promptRuleHolds = record.choice == ActionChoice::Stop ? !record.revised_prompt.has_value() : hasPrompt;
    record.well_formed = parsed.has_value() && promptRuleHolds;
    return record;
}

double aggregate_score(double visual, double instruction)
{
    // same weights, written so equal sub-scores aggregate to exactly that score
    return visual + kInstructionWeight * (instruction - visual);
}

ReviewerFeedback ReviewerFeedback::from_subscores(double visual, double instruction, std::string diagnosis)
{
    auto v = std::clamp(visual, 0.0, kRhoMax);
    auto i = std::clamp(instruction, 0.0, kRhoMax);
    return ReviewerFeedback {
        .visual = v,
        .instruction = i,
        .score = std::clamp(aggregate_score(v, i), 0.0, kRhoMax),
        .diagnosis = std::move(diagnosis),
    };
}

std::string_view to_string(Termination termination)
{
    switch (termination)
    {
        case Termination::StopAction: return "STOP_ACTION";
        case Termination::BudgetExhausted: return "BUDGET_EXHAUSTED";
    }
    return "UNKNOWN";
}

std::optional<Termination> parse_termination(std::string_view text)
{
    if (text == "STOP_ACTION")
        return Termination::StopAction;
    if (text == "BUDGET_EXHAUSTED")
        return Termination::BudgetExhausted;
    return std::nullopt;
}

std::size_t Trajectory::num_candidates() const
{
    return static_cast<std::size_t>(
        std::count_if(turns.begin(), turns.end(), [](const TurnRecord& t) { return t.produces_candidate(); }));
}

void Trajectory::validate() const
{
    auto fail = [this](const std::string& what) {
        throw InputError("trajectory for prompt '" + prompt.id + "': " + what);
    };

    prompt.validate();
    if (t_max < 1)
        fail("t_max must be >= 1");
    if (turns.empty())
        fail("no turns recorded");

    for (std::size_t i = 0; i < turns.size(); ++i)
    {
        auto const& turn = turns[i];
        if (turn.turn_index != static_cast<int>(i) + 1)
            fail("turn indices must be consecutive from 1");

        auto const isStop = turn.action.choice == ActionChoice::Stop;
        if (isStop)
        {
            if (i == 0)
                fail("turn 1 cannot be STOP");
            if (i + 1 != turns.size())
                fail("STOP may only appear as the final turn");
            if (turn.candidate || turn.feedback)
                fail("STOP turns carry no candidate or feedback");
        }
        else if (!turn.candidate || !turn.feedback)
        {
            fail("turn " + std::to_string(turn.turn_index) + " is missing its candidate or feedback");
        }

        if (turn.feedback)
        {
            auto const& f = *turn.feedback;
            for (auto s: {f.visual, f.instruction, f.score})
                if (!(s >= 0.0 && s <= kRhoMax))
                    fail("reviewer scores must lie in [0,5]");
            if (std::abs(f.score - aggregate_score(f.visual, f.instruction)) > 1e-9)
                fail("score must equal 0.3*visual + 0.7*instruction");
        }
        if (turn.candidate && turn.candidate->latent_quality)
        {
            auto q = *turn.candidate->latent_quality;
            if (!(q >= 0.0 && q <= 1.0))
                fail("latent quality must lie in [0,1]");
        }
    }

    auto const n = num_candidates();
    if (n < 1 || n > static_cast<std::size_t>(t_max))
        fail("candidate count must satisfy 1 <= T <= t_max");

    auto const endsWithStop = turns.back().action.choice == ActionChoice::Stop;
    if (endsWithStop != (terminated_by == Termination::StopAction))
        fail("terminated_by disagrees with the final turn");
    if (terminated_by == Termination::BudgetExhausted && n != static_cast<std::size_t>(t_max))
        fail("budget-exhausted trajectory must use all t_max turns");
}

std::vector<double> score_sequence(const Trajectory& trajectory)
{
    auto scores = std::vector<double> {};
    for (auto const& turn: trajectory.turns)
        if (turn.feedback)
            scores.push_back(turn.feedback->score);
    if (scores.empty())
        throw Error("no generated candidates");
    return scores;
}

Selection select_output(const Trajectory& trajectory)
{
    auto const* best = static_cast<const TurnRecord*>(nullptr);
    for (auto const& turn: trajectory.turns)
    {
        if (!turn.candidate || !turn.feedback)
            continue;
        // strict '>' keeps the earliest turn on ties
        if (!best || turn.feedback->score > best->feedback->score)
            best = &turn;
    }
    if (!best)
        throw Error("no generated candidates");
    return Selection {.turn_index = best->turn_index, .candidate = *best->candidate, .score = best->feedback->score};
}

} // namespace gennav
