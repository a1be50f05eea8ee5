// SPDX-License-Identifier: Apache-2.0
#include "gennav/serialize.hpp"

#include "gennav/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gennav::io
{

namespace
{

template <typename T>
T required(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw InputError(std::string("missing field '") + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace

Json to_json(const PromptSpec& prompt)
{
    auto j = Json::object();
    j["id"] = prompt.id;
    j["text"] = prompt.text;
    j["difficulty"] = prompt.difficulty;
    j["tags"] = prompt.tags;
    return j;
}

Json to_json(const ActionRecord& action)
{
    auto j = Json::object();
    j["choice"] = std::string(to_string(action.choice));
    if (action.revised_prompt)
        j["revised_prompt"] = *action.revised_prompt;
    j["well_formed"] = action.well_formed;
    return j;
}

Json to_json(const Candidate& candidate)
{
    auto j = Json::object();
    j["id"] = candidate.id;
    if (candidate.latent_quality)
        j["latent_quality"] = *candidate.latent_quality;
    j["payload_ref"] = candidate.payload_ref;
    return j;
}

Json to_json(const ReviewerFeedback& feedback)
{
    auto j = Json::object();
    j["visual"] = feedback.visual;
    j["instruction"] = feedback.instruction;
    j["score"] = feedback.score;
    j["diagnosis"] = feedback.diagnosis;
    return j;
}

Json to_json(const TurnRecord& turn)
{
    auto j = Json::object();
    j["turn_index"] = turn.turn_index;
    j["action"] = to_json(turn.action);
    if (turn.candidate)
        j["candidate"] = to_json(*turn.candidate);
    if (turn.feedback)
        j["feedback"] = to_json(*turn.feedback);
    return j;
}

Json to_json(const Trajectory& trajectory)
{
    auto j = Json::object();
    j["v"] = std::string(kSchemaVersion);
    j["prompt"] = to_json(trajectory.prompt);
    j["t_max"] = trajectory.t_max;
    j["terminated_by"] = std::string(to_string(trajectory.terminated_by));
    auto turns = Json::array();
    for (auto const& turn: trajectory.turns)
        turns.push_back(to_json(turn));
    j["turns"] = std::move(turns);
    return j;
}

PromptSpec prompt_from_json(const Json& j)
{
    auto prompt = PromptSpec {};
    prompt.id = required<std::string>(j, "id");
    prompt.text = required<std::string>(j, "text");
    prompt.difficulty = required<double>(j, "difficulty");
    if (j.contains("tags"))
        prompt.tags = required<std::vector<std::string>>(j, "tags");
    return prompt;
}

ActionRecord action_from_json(const Json& j)
{
    auto choiceText = required<std::string>(j, "choice");
    auto choice = parse_action_choice(choiceText);
    if (!choice)
        throw InputError("unknown action choice '" + choiceText + "'");
    auto action = ActionRecord {};
    action.choice = *choice;
    if (j.contains("revised_prompt") && !j["revised_prompt"].is_null())
        action.revised_prompt = required<std::string>(j, "revised_prompt");
    action.well_formed = required<bool>(j, "well_formed");
    return action;
}

Candidate candidate_from_json(const Json& j)
{
    auto candidate = Candidate {};
    candidate.id = required<std::string>(j, "id");
    if (j.contains("latent_quality") && !j["latent_quality"].is_null())
        candidate.latent_quality = required<double>(j, "latent_quality");
    candidate.payload_ref = required<std::string>(j, "payload_ref");
    return candidate;
}

ReviewerFeedback feedback_from_json(const Json& j)
{
    return ReviewerFeedback {
        .visual = required<double>(j, "visual"),
        .instruction = required<double>(j, "instruction"),
        .score = required<double>(j, "score"),
        .diagnosis = required<std::string>(j, "diagnosis"),
    };
}

TurnRecord turn_from_json(const Json& j)
{
    auto turn = TurnRecord {};
    turn.turn_index = required<int>(j, "turn_index");
    turn.action = action_from_json(j.at("action"));
    if (j.contains("candidate"))
        turn.candidate = candidate_from_json(j.at("candidate"));
    if (j.contains("feedback"))
        turn.feedback = feedback_from_json(j.at("feedback"));
    return turn;
}

Trajectory trajectory_from_json(const Json& j)
{
    auto version = required<std::string>(j, "v");
    if (version != kSchemaVersion)
        throw InputError("unsupported trajectory schema version '" + version + "'");

    auto trajectory = Trajectory {};
    trajectory.prompt = prompt_from_json(j.at("prompt"));
    trajectory.t_max = required<int>(j, "t_max");
    auto termination = required<std::string>(j, "terminated_by");
    auto parsed = parse_termination(termination);
    if (!parsed)
        throw InputError("unknown termination '" + termination + "'");
    trajectory.terminated_by = *parsed;
    if (!j.contains("turns") || !j["turns"].is_array())
        throw InputError("missing field 'turns'");
    for (auto const& turn: j["turns"])
        trajectory.turns.push_back(turn_from_json(turn));
    trajectory.validate();
    return trajectory;
}

std::string encode_trajectory(const Trajectory& trajectory)
{
    return to_json(trajectory).dump();
}

Trajectory decode_trajectory(std::string_view line)
{
    auto j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
        throw InputError("malformed JSON trajectory record");
    try
    {
        return trajectory_from_json(j);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("bad trajectory record: ") + e.what());
    }
}

std::vector<Trajectory> read_trajectories(const std::string& path)
{
    auto trajectories = std::vector<Trajectory> {};
    auto lineNo = 0;
    for (auto const& line: read_lines(path))
    {
        ++lineNo;
        try
        {
            trajectories.push_back(decode_trajectory(line));
        }
        catch (const InputError& e)
        {
            throw InputError(path + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return trajectories;
}

void write_trajectories(const std::string& path, std::span<const Trajectory> trajectories)
{
    auto out = std::string {};
    for (auto const& t: trajectories)
    {
        out += encode_trajectory(t);
        out += '\n';
    }
    write_text_file(path, out);
}

std::string read_text_file(const std::string& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open input file: " + path);
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, std::string_view contents)
{
    auto out = std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open output file: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw Error("failed writing output file: " + path);
}

std::vector<std::string> read_lines(const std::string& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open input file: " + path);
    auto lines = std::vector<std::string> {};
    auto line = std::string {};
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.push_back(line);
    }
    return lines;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    auto hash = 0xcbf29ce484222325ULL;
    for (unsigned char c: bytes)
    {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_double(double value)
{
    char buf[32];
    auto const [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc {})
        throw Error("cannot format number");
    return std::string(buf, ptr);
}

} // namespace gennav::io
