// SPDX-License-Identifier: Apache-2.0
#include "gennav/cli/settings.hpp"

#include "gennav/error.hpp"
#include "gennav/serialize.hpp"

#include <charconv>
#include <cmath>

namespace gennav::cli
{

namespace
{

std::string number(double value)
{
    return io::format_double(value);
}

std::string_view trim(std::string_view text)
{
    auto const first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    auto const last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

} // namespace

Settings default_settings()
{
    auto const sim = env::SimEnvConfig {};
    auto const reward = reward::RewardWeights {};
    auto const train = trainer::TrainConfig {};
    auto const live = env::LiveEnvConfig {};
    auto const th = policy::HeuristicThresholds {};
    return Settings {
        {"seed", "0"},
        {"workers", "0"},
        {"n_prompts", "200"},
        {"t_max", std::to_string(reward.t_max)},

        {"env.mode", "sim"},
        {"env.base_intercept", number(sim.base_intercept)},
        {"env.base_slope", number(sim.base_slope)},
        {"env.regen_std", number(sim.regen_std)},
        {"env.refine_gain", sim.refine_gain.format()},
        {"env.refine_std", number(sim.refine_std)},
        {"env.reviewer_noise_std", number(sim.reviewer_noise_std)},
        {"env.generator_url", ""},
        {"env.reviewer_url", ""},
        {"env.timeout_ms", std::to_string(live.timeout_ms)},
        {"env.retries", std::to_string(live.retries)},

        {"reward.variant", std::string(reward::to_string(train.reward_variant))},
        {"reward.alpha", number(reward.alpha)},
        {"reward.beta", number(reward.beta)},
        {"reward.gamma", number(reward.gamma)},
        {"reward.rho_max", number(reward.rho_max)},
        {"reward.epsilon", number(reward.epsilon)},

        {"train.k", std::to_string(train.group_size)},
        {"train.steps", std::to_string(train.steps)},
        {"train.lr", number(train.learning_rate)},
        {"train.clip", number(train.clip_epsilon)},
        {"train.prompts_per_step", std::to_string(train.prompts_per_step)},
        {"train.inner_epochs", std::to_string(train.inner_epochs)},
        {"train.init", std::string(trainer::to_string(train.init))},
        {"train.init_sharpness", number(train.init_sharpness)},

        {"policy.kind", "softmax"},
        {"policy.high", number(th.high)},
        {"policy.mid", number(th.mid)},
        {"policy.tie_margin", "0"},

        {"datagen.k", "4"},
        {"datagen.rho_thr", "4.5"},
        {"datagen.refine_share", "0.5"},
        {"datagen.min_peak", "4.5"},

        {"contamination.threshold8", "0.7"},
        {"contamination.cosine_threshold", "0.8"},

        {"report.cost_generation", "0"},
        {"report.cost_review", "0"},
        {"report.cost_decision", "0"},
        {"report.stop_threshold", "4.5"},
        {"report.tie_margin", "0.3"},
    };
}

void set_value(Settings& settings, const std::string& key, const std::string& value)
{
    auto const it = settings.find(key);
    if (it == settings.end())
        throw InputError("unknown setting '" + key + "'");
    it->second = value;
}

Settings parse_config_text(std::string_view text, const std::string& origin)
{
    auto settings = Settings {};
    auto const known = default_settings();
    auto lineNo = 0;
    while (!text.empty())
    {
        auto const end = text.find('\n');
        auto const line = trim(text.substr(0, end));
        text = end == std::string_view::npos ? std::string_view {} : text.substr(end + 1);
        ++lineNo;
        if (line.empty() || line.front() == '#')
            continue;
        auto const eq = line.find('=');
        auto const where = origin + ":" + std::to_string(lineNo);
        if (eq == std::string_view::npos)
            throw InputError(where + ": expected 'key = value'");
        auto const key = std::string(trim(line.substr(0, eq)));
        if (!known.contains(key))
            throw InputError(where + ": unknown setting '" + key + "'");
        settings[key] = std::string(trim(line.substr(eq + 1)));
    }
    return settings;
}

void merge_config_file(Settings& settings, const std::string& path)
{
    for (auto const& [key, value]: parse_config_text(io::read_text_file(path), path))
        set_value(settings, key, value);
}

std::string canonical_text(const Settings& settings)
{
    auto text = std::string {};
    for (auto const& [key, value]: settings)
        text.append(key).append(" = ").append(value).append("\n");
    return text;
}

std::uint64_t config_hash(const Settings& settings)
{
    return io::fnv1a64(canonical_text(settings));
}

std::string get_string(const Settings& settings, const std::string& key)
{
    auto const it = settings.find(key);
    if (it == settings.end())
        throw InputError("unknown setting '" + key + "'");
    return it->second;
}

namespace
{

template <typename T>
T parse_number(const Settings& settings, const std::string& key)
{
    auto const text = get_string(settings, key);
    auto value = T {};
    auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc {} || ptr != text.data() + text.size())
        throw InputError("setting '" + key + "': not a valid number: '" + text + "'");
    return value;
}

} // namespace

double get_double(const Settings& settings, const std::string& key)
{
    auto const value = parse_number<double>(settings, key);
    if (!std::isfinite(value))
        throw InputError("setting '" + key + "' must be finite");
    return value;
}

int get_int(const Settings& settings, const std::string& key)
{
    return parse_number<int>(settings, key);
}

std::uint64_t get_u64(const Settings& settings, const std::string& key)
{
    return parse_number<std::uint64_t>(settings, key);
}

reward::RewardWeights reward_weights(const Settings& settings)
{
    auto weights = reward::RewardWeights {};
    weights.alpha = get_double(settings, "reward.alpha");
    weights.beta = get_double(settings, "reward.beta");
    weights.gamma = get_double(settings, "reward.gamma");
    weights.rho_max = get_double(settings, "reward.rho_max");
    weights.epsilon = get_double(settings, "reward.epsilon");
    weights.t_max = get_int(settings, "t_max");
    weights.validate();
    return weights;
}

trainer::TrainConfig train_config(const Settings& settings)
{
    auto config = trainer::TrainConfig {};
    config.weights = reward_weights(settings);
    auto const variant = reward::parse_reward_variant(get_string(settings, "reward.variant"));
    if (!variant)
        throw InputError("unknown reward variant '" + get_string(settings, "reward.variant") + "'");
    config.reward_variant = *variant;
    config.group_size = get_int(settings, "train.k");
    config.steps = get_int(settings, "train.steps");
    config.learning_rate = get_double(settings, "train.lr");
    config.clip_epsilon = get_double(settings, "train.clip");
    config.prompts_per_step = get_int(settings, "train.prompts_per_step");
    config.inner_epochs = get_int(settings, "train.inner_epochs");
    auto const init = trainer::parse_init_mode(get_string(settings, "train.init"));
    if (!init)
        throw InputError("unknown init mode '" + get_string(settings, "train.init") + "' (zeros|heuristic)");
    config.init = *init;
    config.init_sharpness = get_double(settings, "train.init_sharpness");
    config.init_thresholds = thresholds(settings);
    config.seed = get_u64(settings, "seed");
    config.workers = get_int(settings, "workers");
    config.validate();
    return config;
}

env::SimEnvConfig sim_config(const Settings& settings)
{
    auto config = env::SimEnvConfig {};
    config.base_intercept = get_double(settings, "env.base_intercept");
    config.base_slope = get_double(settings, "env.base_slope");
    config.regen_std = get_double(settings, "env.regen_std");
    config.refine_gain = env::PiecewiseLinear::parse(get_string(settings, "env.refine_gain"));
    config.refine_std = get_double(settings, "env.refine_std");
    config.reviewer_noise_std = get_double(settings, "env.reviewer_noise_std");
    config.seed = get_u64(settings, "seed");
    config.validate();
    return config;
}

std::unique_ptr<env::Environment> make_environment(const Settings& settings)
{
    auto const mode = get_string(settings, "env.mode");
    if (mode == "sim")
        return std::make_unique<env::SimEnvironment>(sim_config(settings));
    if (mode == "live")
    {
        auto config = env::LiveEnvConfig {};
        config.generator_url = get_string(settings, "env.generator_url");
        config.reviewer_url = get_string(settings, "env.reviewer_url");
        config.timeout_ms = get_int(settings, "env.timeout_ms");
        config.retries = get_int(settings, "env.retries");
        return std::make_unique<env::LiveEnvironment>(std::move(config));
    }
    throw InputError("unknown env.mode '" + mode + "' (sim|live)");
}

policy::HeuristicThresholds thresholds(const Settings& settings)
{
    auto th = policy::HeuristicThresholds {.high = get_double(settings, "policy.high"),
                                           .mid = get_double(settings, "policy.mid")};
    if (!(th.mid <= th.high))
        throw InputError("policy.mid must not exceed policy.high");
    return th;
}

metrics::CostModel cost_model(const Settings& settings)
{
    auto costs = metrics::CostModel {.generation = get_double(settings, "report.cost_generation"),
                                     .review = get_double(settings, "report.cost_review"),
                                     .decision = get_double(settings, "report.cost_decision")};
    if (costs.generation < 0 || costs.review < 0 || costs.decision < 0)
        throw InputError("latency costs must be >= 0");
    return costs;
}

} // namespace gennav::cli
