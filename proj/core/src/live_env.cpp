// SPDX-License-Identifier: Apache-2.0
#include "gennav/live_env.hpp"

#include "gennav/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>

namespace gennav::env
{

namespace
{

struct Endpoint
{
    std::string origin; ///< scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url)
{
    auto const scheme = url.find("://");
    if (scheme == std::string::npos || url.substr(0, scheme) != "http")
        throw InputError("unsupported endpoint url (expected http://host[:port]/path): " + url);
    auto const slash = url.find('/', scheme + 3);
    if (slash == std::string::npos)
        return Endpoint {url, "/"};
    return Endpoint {url.substr(0, slash), url.substr(slash)};
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const LiveEnvConfig& config)
{
    auto const endpoint = split_url(url);
    auto client = httplib::Client(endpoint.origin);
    auto const seconds = config.timeout_ms / 1000;
    auto const micros = (config.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);

    auto const payload = body.dump();
    auto lastError = std::string {};
    for (auto attempt = 0; attempt <= config.retries; ++attempt)
    {
        auto result = client.Post(endpoint.path, payload, "application/json");
        if (!result)
        {
            lastError = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status >= 500)
        {
            lastError = "HTTP " + std::to_string(result->status);
            continue;
        }
        if (result->status != 200)
            throw Error(url + ": HTTP " + std::to_string(result->status));
        try
        {
            return nlohmann::json::parse(result->body);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(url + ": malformed JSON reply: " + e.what());
        }
    }
    throw Error(url + ": " + lastError + " after " + std::to_string(config.retries + 1) + " attempt(s)");
}

double score_field(const nlohmann::json& reply, const char* key, const std::string& url)
{
    auto const it = reply.find(key);
    if (it == reply.end() || !it->is_number())
        throw Error(url + ": reply lacks numeric '" + key + "'");
    auto const value = it->get<double>();
    if (!std::isfinite(value) || value < 0.0 || value > kRhoMax)
        throw Error(url + ": '" + key + "' outside [0,5]");
    return value;
}

Candidate make_candidate(const PromptSpec& prompt, int turn, const nlohmann::json& reply, const std::string& url)
{
    auto const it = reply.find("payload_ref");
    if (it == reply.end() || !it->is_string() || it->get<std::string>().empty())
        throw Error(url + ": reply lacks 'payload_ref'");
    return Candidate {.id = prompt.id + "/t" + std::to_string(turn), .latent_quality = std::nullopt,
                      .payload_ref = it->get<std::string>()};
}

const std::string& action_prompt(const PromptSpec& prompt, const ActionRecord& action)
{
    return action.revised_prompt ? *action.revised_prompt : prompt.text;
}

} // namespace

void LiveEnvConfig::validate() const
{
    split_url(generator_url);
    split_url(reviewer_url);
    if (timeout_ms <= 0)
        throw InputError("live timeout must be positive");
    if (retries < 0)
        throw InputError("live retries must be >= 0");
}

LiveEnvironment::LiveEnvironment(LiveEnvConfig config): _config(std::move(config))
{
    _config.validate();
}

Candidate LiveEnvironment::generate(const PromptSpec& prompt, const ActionRecord& action, int turn, Rng&) const
{
    auto const body = nlohmann::json {{"mode", "t2i"}, {"prompt", action_prompt(prompt, action)}};
    return make_candidate(prompt, turn, post_json(_config.generator_url, body, _config), _config.generator_url);
}

Candidate LiveEnvironment::refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord& action,
                                  int turn, Rng&) const
{
    auto const body = nlohmann::json {
        {"mode", "i2i"}, {"prompt", action_prompt(prompt, action)}, {"source_ref", current.payload_ref}};
    return make_candidate(prompt, turn, post_json(_config.generator_url, body, _config), _config.generator_url);
}

ReviewerFeedback LiveEnvironment::review(const PromptSpec& prompt, const Candidate& candidate, Rng&) const
{
    auto const body = nlohmann::json {{"prompt", prompt.text}, {"payload_ref", candidate.payload_ref}};
    auto const reply = post_json(_config.reviewer_url, body, _config);
    auto const& url = _config.reviewer_url;
    auto const visual = score_field(reply, "visual", url);
    auto const instruction = score_field(reply, "instruction", url);
    auto diagnosis = std::string {};
    if (auto it = reply.find("diagnosis"); it != reply.end() && it->is_string())
        diagnosis = it->get<std::string>();
    return ReviewerFeedback::from_subscores(visual, instruction, std::move(diagnosis));
}

} // namespace gennav::env
