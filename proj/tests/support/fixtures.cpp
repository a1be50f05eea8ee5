// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <string>

namespace gennav::testing
{

PromptSpec test_prompt(std::string id, double difficulty)
{
    return PromptSpec {.id = std::move(id), .text = "a red cube left of a blue sphere", .difficulty = difficulty,
                       .tags = {"test"}};
}

Trajectory trajectory_from_scores(const std::vector<double>& scores, bool stop, int t_max, ActionChoice later_action)
{
    auto trajectory = Trajectory {};
    trajectory.prompt = test_prompt();
    auto const t = static_cast<int>(scores.size());
    trajectory.t_max = t_max > 0 ? t_max : (stop ? t + 1 : t);
    trajectory.terminated_by = stop ? Termination::StopAction : Termination::BudgetExhausted;
    for (int i = 0; i < t; ++i)
    {
        auto const turn = i + 1;
        auto const choice = turn == 1 ? ActionChoice::Regenerate : later_action;
        auto action = choice == ActionChoice::Refine ? ActionRecord::refine("edit " + std::to_string(turn))
                                                     : ActionRecord::regenerate("prompt " + std::to_string(turn));
        auto feedback = ReviewerFeedback::from_subscores(scores[i], scores[i], "fixture");
        feedback.score = scores[i];
        trajectory.turns.push_back(TurnRecord {
            .turn_index = turn,
            .action = std::move(action),
            .candidate = Candidate {.id = "c" + std::to_string(turn), .latent_quality = scores[i] / 5.0,
                                    .payload_ref = "sim://c" + std::to_string(turn)},
            .feedback = feedback,
        });
    }
    if (stop)
        trajectory.turns.push_back(TurnRecord {.turn_index = t + 1, .action = ActionRecord::stop(),
                                               .candidate = std::nullopt, .feedback = std::nullopt});
    return trajectory;
}

} // namespace gennav::testing
