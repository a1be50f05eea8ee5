// SPDX-License-Identifier: Apache-2.0
#include "gennav/datagen.hpp"

#include "gennav/error.hpp"
#include "gennav/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gennav::datagen
{

SimProposer::SimProposer(double refine_share): _refine_share(refine_share)
{
    if (!(refine_share >= 0.0 && refine_share <= 1.0))
        throw InputError("refine share must lie in [0,1]");
}

std::vector<ActionRecord> SimProposer::propose(const PromptSpec& prompt, std::span<const TurnRecord> path, int turn,
                                               int k, Rng& rng) const
{
    auto actions = std::vector<ActionRecord> {};
    actions.reserve(static_cast<std::size_t>(k));
    for (auto branch = 0; branch < k; ++branch)
    {
        auto choice = ActionChoice::Regenerate;
        if (turn > 1 && !path.empty() && rng.split(static_cast<std::uint64_t>(branch)).uniform() < _refine_share)
            choice = ActionChoice::Refine;
        auto text = env::placeholder_prompt(prompt.id, turn, choice) + "/b" + std::to_string(branch + 1);
        actions.push_back(choice == ActionChoice::Refine ? ActionRecord::refine(std::move(text))
                                                         : ActionRecord::regenerate(std::move(text)));
    }
    return actions;
}

std::string_view to_string(StopReason reason)
{
    switch (reason)
    {
        case StopReason::Threshold: return "THRESHOLD";
        case StopReason::NoImprovement: return "NO_IMPROVEMENT";
        case StopReason::Budget: return "BUDGET";
    }
    return "UNKNOWN";
}

std::optional<StopReason> parse_stop_reason(std::string_view text)
{
    for (auto reason: {StopReason::Threshold, StopReason::NoImprovement, StopReason::Budget})
        if (to_string(reason) == text)
            return reason;
    return std::nullopt;
}

std::vector<double> BranchLog::path_scores() const
{
    auto scores = std::vector<double> {};
    for (std::size_t i = 0; i < path_length && i < tree.size(); ++i)
        scores.push_back(tree[i].best().feedback.score);
    return scores;
}

Trajectory BranchLog::path_trajectory() const
{
    auto trajectory = Trajectory {.prompt = prompt, .turns = {}, .t_max = t_max,
                                  .terminated_by = Termination::BudgetExhausted};
    for (std::size_t i = 0; i < path_length; ++i)
    {
        auto const& best = tree[i].best();
        trajectory.turns.push_back(TurnRecord {.turn_index = tree[i].turn, .action = best.action,
                                               .candidate = best.candidate, .feedback = best.feedback});
    }
    auto const next = static_cast<int>(path_length) + 1;
    if (next <= t_max)
    {
        trajectory.turns.push_back(TurnRecord {.turn_index = next, .action = ActionRecord::stop(),
                                               .candidate = std::nullopt, .feedback = std::nullopt});
        trajectory.terminated_by = Termination::StopAction;
    }
    return trajectory;
}

BranchLog branch_and_select(const Proposer& proposer, const env::Environment& environment, const PromptSpec& prompt,
                            int k, int t_max, double rho_thr, const Rng& rng)
{
    if (k < 1)
        throw InputError("branch size K must be >= 1");
    if (t_max < 1)
        throw InputError("t_max must be >= 1");
    if (!(rho_thr > 0.0 && rho_thr <= kRhoMax))
        throw InputError("rho_thr must lie in (0,5]");

    auto log = BranchLog {.prompt = prompt, .k = k, .t_max = t_max, .rho_thr = rho_thr, .tree = {},
                          .path_length = 0, .stop_reason = StopReason::Budget};
    auto path = std::vector<TurnRecord> {};
    auto rhoBest = -std::numeric_limits<double>::infinity();

    for (auto turn = 1; turn <= t_max; ++turn)
    {
        auto const turnRng = rng.split(static_cast<std::uint64_t>(turn));
        auto expanded = ExpandedTurn {.turn = turn, .branches = {}, .selected = 0};
        try
        {
            auto proposerRng = turnRng.split(0);
            auto actions = proposer.propose(prompt, path, turn, k, proposerRng);
            if (actions.size() != static_cast<std::size_t>(k))
                throw Error("proposer returned " + std::to_string(actions.size()) + " actions, expected "
                            + std::to_string(k));
            for (std::size_t b = 0; b < actions.size(); ++b)
            {
                auto generatorRng = turnRng.split(1).split(b);
                auto reviewerRng = turnRng.split(2).split(b);
                auto& action = actions[b];
                auto candidate = action.choice == ActionChoice::Refine && !path.empty()
                                     ? environment.refine(prompt, *path.back().candidate, action, turn, generatorRng)
                                     : environment.generate(prompt, action, turn, generatorRng);
                auto feedback = environment.review(prompt, candidate, reviewerRng);
                expanded.branches.push_back(BranchEntry {.action = std::move(action),
                                                         .candidate = std::move(candidate),
                                                         .feedback = std::move(feedback)});
            }
        }
        catch (const std::exception& e)
        {
            throw Error("prompt '" + prompt.id + "', turn " + std::to_string(turn) + ": " + e.what());
        }

        for (std::size_t b = 1; b < expanded.branches.size(); ++b)
            if (expanded.branches[b].feedback.score > expanded.branches[expanded.selected].feedback.score)
                expanded.selected = b;
        auto const rho = expanded.best().feedback.score;
        log.tree.push_back(expanded);

        if (rho >= rho_thr)
        {
            log.stop_reason = StopReason::Threshold;
            ++log.path_length;
            return log;
        }
        if (rho <= rhoBest)
        {
            log.stop_reason = StopReason::NoImprovement;
            return log;
        }
        rhoBest = rho;
        ++log.path_length;
        auto const& best = log.tree.back().best();
        path.push_back(TurnRecord {.turn_index = turn, .action = best.action, .candidate = best.candidate,
                                   .feedback = best.feedback});
        if (turn == t_max)
            log.stop_reason = StopReason::Budget;
    }
    return log;
}

std::string_view to_string(FilterRule rule)
{
    return rule == FilterRule::NotStrictlyIncreasing ? "NOT_STRICTLY_INCREASING" : "PEAK_TOO_LOW";
}

std::optional<FilterRule> check_scores(std::span<const double> scores, double min_peak)
{
    if (scores.empty())
        return FilterRule::PeakTooLow;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (!(scores[i] > scores[i - 1]))
            return FilterRule::NotStrictlyIncreasing;
    if (!(*std::max_element(scores.begin(), scores.end()) > min_peak))
        return FilterRule::PeakTooLow;
    return std::nullopt;
}

FilterResult filter_trajectories(std::span<const BranchLog> logs, double min_peak)
{
    auto result = FilterResult {};
    for (auto const& log: logs)
    {
        auto const rule = check_scores(log.path_scores(), min_peak);
        if (!rule)
        {
            result.kept.push_back(log);
            ++result.stats.kept;
            continue;
        }
        result.rejected.emplace_back(log.prompt.id, *rule);
        if (*rule == FilterRule::NotStrictlyIncreasing)
            ++result.stats.not_increasing;
        else
            ++result.stats.peak_too_low;
    }
    return result;
}

namespace
{

std::string state_summary(int turn, int t_max, std::optional<double> last_score)
{
    char buf[96];
    if (last_score)
        std::snprintf(buf, sizeof(buf), "turn %d/%d; last score %.2f", turn, t_max, *last_score);
    else
        std::snprintf(buf, sizeof(buf), "turn %d/%d; no image yet", turn, t_max);
    return buf;
}

} // namespace

ConversationRecord to_conversation(const BranchLog& log)
{
    auto record = ConversationRecord {.prompt = log.prompt, .turns = {}};
    auto previous = std::optional<ReviewerFeedback> {};
    for (std::size_t i = 0; i < log.path_length; ++i)
    {
        auto const& best = log.tree[i].best();
        auto const last = previous ? std::optional<double>(previous->score) : std::nullopt;
        record.turns.push_back(ConversationTurn {.turn = log.tree[i].turn,
                                                 .state = state_summary(log.tree[i].turn, log.t_max, last),
                                                 .feedback = previous, .target = best.action});
        previous = best.feedback;
    }
    if (log.stop_reason == StopReason::Threshold && previous)
    {
        auto const turn = static_cast<int>(log.path_length) + 1;
        record.turns.push_back(ConversationTurn {.turn = turn,
                                                 .state = state_summary(turn, log.t_max, previous->score),
                                                 .feedback = previous, .target = ActionRecord::stop()});
    }
    return record;
}

std::vector<ConversationRecord> export_conversational(std::span<const BranchLog> kept)
{
    auto records = std::vector<ConversationRecord> {};
    records.reserve(kept.size());
    for (auto const& log: kept)
        records.push_back(to_conversation(log));
    return records;
}

namespace
{

io::Json parse_record(std::string_view line, const char* what)
{
    auto j = io::Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError(std::string("malformed JSON ") + what + " record");
    if (!j.contains("v") || j["v"] != io::kSchemaVersion)
        throw InputError(std::string("unsupported ") + what + " schema version");
    return j;
}

const io::Json& field(const io::Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw InputError(std::string("missing field '") + key + "'");
    return j.at(key);
}

} // namespace

std::string encode_conversation(const ConversationRecord& record)
{
    auto j = io::Json::object();
    j["v"] = io::kSchemaVersion;
    j["prompt"] = io::to_json(record.prompt);
    auto turns = io::Json::array();
    for (auto const& turn: record.turns)
    {
        auto t = io::Json::object();
        t["turn"] = turn.turn;
        t["state"] = turn.state;
        if (turn.feedback)
            t["feedback"] = io::to_json(*turn.feedback);
        t["target"] = io::to_json(turn.target);
        turns.push_back(std::move(t));
    }
    j["turns"] = std::move(turns);
    return j.dump();
}

ConversationRecord decode_conversation(std::string_view line)
{
    auto const j = parse_record(line, "conversation");
    try
    {
        auto record = ConversationRecord {.prompt = io::prompt_from_json(field(j, "prompt")), .turns = {}};
        for (auto const& t: field(j, "turns"))
        {
            auto turn = ConversationTurn {};
            turn.turn = field(t, "turn").get<int>();
            turn.state = field(t, "state").get<std::string>();
            if (t.contains("feedback") && !t["feedback"].is_null())
                turn.feedback = io::feedback_from_json(t["feedback"]);
            turn.target = io::action_from_json(field(t, "target"));
            record.turns.push_back(std::move(turn));
        }
        return record;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("bad conversation record: ") + e.what());
    }
}

std::string encode_branch_log(const BranchLog& log)
{
    auto j = io::Json::object();
    j["v"] = io::kSchemaVersion;
    j["prompt"] = io::to_json(log.prompt);
    j["k"] = log.k;
    j["t_max"] = log.t_max;
    j["rho_thr"] = log.rho_thr;
    j["stop_reason"] = std::string(to_string(log.stop_reason));
    j["path_length"] = log.path_length;
    auto tree = io::Json::array();
    for (auto const& expanded: log.tree)
    {
        auto t = io::Json::object();
        t["turn"] = expanded.turn;
        t["selected"] = expanded.selected;
        auto branches = io::Json::array();
        for (auto const& entry: expanded.branches)
            branches.push_back(io::Json {{"action", io::to_json(entry.action)},
                                         {"candidate", io::to_json(entry.candidate)},
                                         {"feedback", io::to_json(entry.feedback)}});
        t["branches"] = std::move(branches);
        tree.push_back(std::move(t));
    }
    j["tree"] = std::move(tree);
    return j.dump();
}

BranchLog decode_branch_log(std::string_view line)
{
    auto const j = parse_record(line, "branch log");
    try
    {
        auto log = BranchLog {};
        log.prompt = io::prompt_from_json(field(j, "prompt"));
        log.k = field(j, "k").get<int>();
        log.t_max = field(j, "t_max").get<int>();
        log.rho_thr = field(j, "rho_thr").get<double>();
        auto const reason = parse_stop_reason(field(j, "stop_reason").get<std::string>());
        if (!reason)
            throw InputError("unknown stop reason");
        log.stop_reason = *reason;
        log.path_length = field(j, "path_length").get<std::size_t>();
        for (auto const& t: field(j, "tree"))
        {
            auto expanded = ExpandedTurn {};
            expanded.turn = field(t, "turn").get<int>();
            expanded.selected = field(t, "selected").get<std::size_t>();
            for (auto const& b: field(t, "branches"))
                expanded.branches.push_back(BranchEntry {.action = io::action_from_json(field(b, "action")),
                                                         .candidate = io::candidate_from_json(field(b, "candidate")),
                                                         .feedback = io::feedback_from_json(field(b, "feedback"))});
            if (expanded.selected >= expanded.branches.size())
                throw InputError("selected branch out of range");
            log.tree.push_back(std::move(expanded));
        }
        if (log.path_length > log.tree.size())
            throw InputError("path length exceeds the tree");
        return log;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("bad branch log record: ") + e.what());
    }
}

} // namespace gennav::datagen
