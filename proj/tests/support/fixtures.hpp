// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/types.hpp"

#include <vector>

namespace gennav::testing {

PromptSpec test_prompt(std::string id = "p1", double difficulty = 0.3);

/// Trajectory whose candidate turns carry these reviewer scores (visual = instruction = score).
/// With `stop`, a STOP turn follows the last candidate; otherwise the budget must be used up,
/// so t_max defaults to the number of scores.
Trajectory trajectory_from_scores(const std::vector<double>& scores, bool stop = false, int t_max = 0,
                                  ActionChoice later_action = ActionChoice::Refine);

} // namespace gennav::testing
