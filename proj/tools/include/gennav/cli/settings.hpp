// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/datagen.hpp"
#include "gennav/env.hpp"
#include "gennav/live_env.hpp"
#include "gennav/metrics.hpp"
#include "gennav/policy.hpp"
#include "gennav/reward.hpp"
#include "gennav/trainer.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace gennav::cli {

/// Every tunable as text, keyed like "train.steps". Ordered, so dumps and hashes are stable.
using Settings = std::map<std::string, std::string>;

Settings default_settings();

/// Parses `key = value` lines; '#' starts a comment line. Unknown keys are an input error.
Settings parse_config_text(std::string_view text, const std::string& origin);
void merge_config_file(Settings& settings, const std::string& path);

/// Sets a known key; unknown keys are an input error.
void set_value(Settings& settings, const std::string& key, const std::string& value);

std::string canonical_text(const Settings& settings);
std::uint64_t config_hash(const Settings& settings);

std::string get_string(const Settings& settings, const std::string& key);
double get_double(const Settings& settings, const std::string& key);
int get_int(const Settings& settings, const std::string& key);
std::uint64_t get_u64(const Settings& settings, const std::string& key);

reward::RewardWeights reward_weights(const Settings& settings);
trainer::TrainConfig train_config(const Settings& settings);
env::SimEnvConfig sim_config(const Settings& settings);
std::unique_ptr<env::Environment> make_environment(const Settings& settings);
policy::HeuristicThresholds thresholds(const Settings& settings);
metrics::CostModel cost_model(const Settings& settings);

} // namespace gennav::cli
