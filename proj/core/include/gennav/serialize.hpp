// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gennav::io {

using Json = nlohmann::ordered_json;

/// Schema tag written into every log record.
inline constexpr std::string_view kSchemaVersion = "v1";

Json to_json(const PromptSpec& prompt);
Json to_json(const ActionRecord& action);
Json to_json(const Candidate& candidate);
Json to_json(const ReviewerFeedback& feedback);
Json to_json(const TurnRecord& turn);
Json to_json(const Trajectory& trajectory);

PromptSpec prompt_from_json(const Json& j);
ActionRecord action_from_json(const Json& j);
Candidate candidate_from_json(const Json& j);
ReviewerFeedback feedback_from_json(const Json& j);
TurnRecord turn_from_json(const Json& j);
Trajectory trajectory_from_json(const Json& j);

/// One trajectory per line; decode(encode(x)) == x and encode(decode(line)) == line.
std::string encode_trajectory(const Trajectory& trajectory);
Trajectory decode_trajectory(std::string_view line);

std::vector<Trajectory> read_trajectories(const std::string& path);
void write_trajectories(const std::string& path, std::span<const Trajectory> trajectories);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);
/// Non-empty lines; a trailing '\r' is dropped.
std::vector<std::string> read_lines(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

} // namespace gennav::io
