// SPDX-License-Identifier: Apache-2.0
#include "gennav/env.hpp"

#include "gennav/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace gennav::env
{

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> knots): _knots(std::move(knots))
{
    if (_knots.empty())
        throw InputError("piecewise-linear map needs at least one knot");
    for (std::size_t i = 1; i < _knots.size(); ++i)
        if (!(_knots[i].first > _knots[i - 1].first))
            throw InputError("piecewise-linear knots must have strictly increasing x");
    for (auto const& [x, y]: _knots)
        if (!std::isfinite(x) || !std::isfinite(y))
            throw InputError("piecewise-linear knots must be finite");
}

double PiecewiseLinear::operator()(double x) const
{
    if (_knots.empty())
        return 0.0;
    if (x <= _knots.front().first)
        return _knots.front().second;
    if (x >= _knots.back().first)
        return _knots.back().second;
    auto upper = std::upper_bound(_knots.begin(), _knots.end(), x,
                                  [](double value, const auto& knot) { return value < knot.first; });
    auto lower = std::prev(upper);
    auto const w = (x - lower->first) / (upper->first - lower->first);
    return lower->second + w * (upper->second - lower->second);
}

PiecewiseLinear PiecewiseLinear::parse(std::string_view text)
{
    auto knots = std::vector<std::pair<double, double>> {};
    auto parseNumber = [&](std::string_view s) {
        auto value = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc {} || ptr != s.data() + s.size())
            throw InputError("bad number '" + std::string(s) + "' in knot list '" + std::string(text) + "'");
        return value;
    };
    auto rest = text;
    while (!rest.empty())
    {
        auto comma = rest.find(',');
        auto item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view {} : rest.substr(comma + 1);
        auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw InputError("knot '" + std::string(item) + "' must be written as x:y");
        knots.emplace_back(parseNumber(item.substr(0, colon)), parseNumber(item.substr(colon + 1)));
    }
    return PiecewiseLinear(std::move(knots));
}

std::string PiecewiseLinear::format() const
{
    auto out = std::string {};
    for (std::size_t i = 0; i < _knots.size(); ++i)
        out.append(i ? "," : "")
            .append(io::format_double(_knots[i].first))
            .append(":")
            .append(io::format_double(_knots[i].second));
    return out;
}

void SimEnvConfig::validate() const
{
    if (!(regen_std >= 0.0) || !(refine_std >= 0.0) || !(reviewer_noise_std >= 0.0))
        throw InputError("simulation standard deviations must be >= 0");
    if (!std::isfinite(base_intercept) || !std::isfinite(base_slope))
        throw InputError("base quality map must be finite");
    if (refine_gain.knots().empty())
        throw InputError("refine gain map needs at least one knot");
}

namespace
{

std::string candidate_id(const PromptSpec& prompt, int turn, const Rng& rng)
{
    return prompt.id + "/t" + std::to_string(turn) + "/" + io::hex64(rng.seed()).substr(0, 8);
}

std::string diagnose(double instruction)
{
    if (instruction < 2.0)
        return "Key subjects missing or composition garbled; the image needs a fresh start.";
    if (instruction < 3.5)
        return "Main subject present but several requested attributes are wrong.";
    if (instruction < 4.5)
        return "Minor details are off; a targeted edit would fix them.";
    return "No major flaws; the request is fulfilled.";
}

} // namespace

SimEnvironment::SimEnvironment(SimEnvConfig config): _config(std::move(config))
{
    _config.validate();
}

Candidate SimEnvironment::generate(const PromptSpec& prompt, const ActionRecord&, int turn, Rng& rng) const
{
    auto const id = candidate_id(prompt, turn, rng);
    auto const mean = _config.base_quality_mean(prompt.difficulty);
    auto const latent = std::clamp(rng.normal(mean, _config.regen_std), 0.0, 1.0);
    return Candidate {.id = id, .latent_quality = latent, .payload_ref = "sim://" + id};
}

Candidate SimEnvironment::refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord&, int turn,
                                 Rng& rng) const
{
    if (!current.latent_quality)
        throw Error("simulated refine needs a simulated source candidate");
    auto const id = candidate_id(prompt, turn, rng);
    auto const q = *current.latent_quality;
    auto const latent = std::clamp(q + rng.normal(_config.refine_gain(q), _config.refine_std), 0.0, 1.0);
    return Candidate {.id = id, .latent_quality = latent, .payload_ref = "sim://" + id};
}

ReviewerFeedback SimEnvironment::review(const PromptSpec&, const Candidate& candidate, Rng& rng) const
{
    if (!candidate.latent_quality)
        throw Error("simulated reviewer needs a simulated candidate");
    auto const q = *candidate.latent_quality;
    auto const instruction = std::clamp(kRhoMax * q + rng.normal(0.0, _config.reviewer_noise_std), 0.0, kRhoMax);
    auto const visual =
        std::clamp(kRhoMax * (0.5 + 0.5 * q) + rng.normal(0.0, _config.reviewer_noise_std), 0.0, kRhoMax);
    return ReviewerFeedback::from_subscores(visual, instruction, diagnose(instruction));
}

ActionRecord Navigator::initial_action(const PromptSpec& prompt) const
{
    return ActionRecord::regenerate(placeholder_prompt(prompt.id, 1, ActionChoice::Regenerate));
}

std::string placeholder_prompt(std::string_view prompt_id, int turn, ActionChoice choice)
{
    auto name = std::string(to_string(choice));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::string(prompt_id) + "/t" + std::to_string(turn) + "/" + name;
}

EpisodeError::EpisodeError(const std::string& what, int turn, Trajectory partial):
    Error(what), _turn(turn), _partial(std::move(partial))
{
}

TurnStreams TurnStreams::for_turn(const Rng& episode, int turn)
{
    auto const t = episode.split(static_cast<std::uint64_t>(turn));
    return TurnStreams {.action = t.split(0), .generator = t.split(1), .reviewer = t.split(2)};
}

Trajectory run_episode(const Navigator& navigator, const Environment& environment, const PromptSpec& prompt,
                       int t_max, const Rng& rng)
{
    if (t_max < 1)
        throw InputError("t_max must be >= 1");

    auto trajectory = Trajectory {.prompt = prompt, .turns = {}, .t_max = t_max,
                                  .terminated_by = Termination::BudgetExhausted};

    auto execute = [&](int turn, ActionRecord action, TurnStreams& streams) {
        try
        {
            auto const* current = trajectory.turns.empty() ? nullptr : &*trajectory.turns.back().candidate;
            auto candidate = action.choice == ActionChoice::Refine && current
                                 ? environment.refine(prompt, *current, action, turn, streams.generator)
                                 : environment.generate(prompt, action, turn, streams.generator);
            auto feedback = environment.review(prompt, candidate, streams.reviewer);
            trajectory.turns.push_back(TurnRecord {.turn_index = turn, .action = std::move(action),
                                                   .candidate = std::move(candidate),
                                                   .feedback = std::move(feedback)});
        }
        catch (const EpisodeError&)
        {
            throw;
        }
        catch (const std::exception& e)
        {
            throw EpisodeError("prompt '" + prompt.id + "', turn " + std::to_string(turn) + ": " + e.what(), turn,
                               trajectory);
        }
    };

    auto first = TurnStreams::for_turn(rng, 1);
    execute(1, navigator.initial_action(prompt), first);

    for (auto turn = 2; turn <= t_max; ++turn)
    {
        auto streams = TurnStreams::for_turn(rng, turn);
        auto const context = DecisionContext {.prompt = prompt, .history = trajectory.turns, .turn = turn,
                                              .t_max = t_max};
        auto action = navigator.act(context, streams.action);
        if (action.choice == ActionChoice::Stop)
        {
            trajectory.turns.push_back(TurnRecord {.turn_index = turn, .action = std::move(action),
                                                   .candidate = std::nullopt, .feedback = std::nullopt});
            trajectory.terminated_by = Termination::StopAction;
            return trajectory;
        }
        execute(turn, std::move(action), streams);
    }
    return trajectory;
}

std::vector<PromptSpec> synthetic_prompt_pool(std::size_t count, std::uint64_t seed)
{
    auto const root = Rng(seed);
    auto pool = std::vector<PromptSpec> {};
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        auto draw = root.split(i);
        char id[32];
        std::snprintf(id, sizeof(id), "p%05zu", i);
        pool.push_back(PromptSpec {.id = id,
                                   .text = std::string("synthetic prompt ") + id,
                                   .difficulty = draw.uniform(),
                                   .tags = {"synthetic"}});
    }
    return pool;
}

std::vector<PromptSpec> load_prompt_pool(const std::string& path)
{
    auto pool = std::vector<PromptSpec> {};
    auto lineNo = 0;
    for (auto const& line: io::read_lines(path))
    {
        ++lineNo;
        auto j = io::Json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError(path + ":" + std::to_string(lineNo) + ": malformed JSON prompt record");
        try
        {
            auto prompt = io::prompt_from_json(j);
            prompt.validate();
            pool.push_back(std::move(prompt));
        }
        catch (const InputError& e)
        {
            throw InputError(path + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    if (pool.empty())
        throw InputError("prompt pool is empty: " + path);
    return pool;
}

} // namespace gennav::env
