// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/env.hpp"

#include <functional>
#include <map>
#include <mutex>

namespace gennav::testing {

/// Environment whose reviewer score is chosen by a script:
/// score(action, turn, call index within that turn). Visual and instruction both equal it.
class ScriptedEnvironment final : public env::Environment
{
public:
    using Script = std::function<double(const ActionRecord&, int turn, int call)>;

    explicit ScriptedEnvironment(Script script): _script(std::move(script)) {}

    /// Per-turn lists of branch scores, consumed in call order; repeats the last list past the end.
    static ScriptedEnvironment from_table(std::vector<std::vector<double>> table);

    Candidate generate(const PromptSpec& prompt, const ActionRecord& action, int turn, Rng& rng) const override;
    Candidate refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord& action, int turn,
                     Rng& rng) const override;
    ReviewerFeedback review(const PromptSpec& prompt, const Candidate& candidate, Rng& rng) const override;

    /// Makes generate/refine throw at this turn.
    void fail_at(int turn) { _failTurn = turn; }

private:
    Candidate make(const PromptSpec& prompt, const ActionRecord& action, int turn) const;

    Script _script;
    int _failTurn = 0;
    mutable std::mutex _mutex;
    mutable std::map<int, int> _calls;
};

} // namespace gennav::testing
