// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/env.hpp"

#include <string>

namespace gennav::env {

struct LiveEnvConfig
{
    std::string generator_url; ///< e.g. http://127.0.0.1:8080/generate
    std::string reviewer_url;  ///< e.g. http://127.0.0.1:8080/review
    int timeout_ms = 30000;
    int retries = 2; ///< extra attempts after a transport failure or 5xx reply

    void validate() const;
};

/// HTTP adapter for external generator and reviewer services (JSON bodies).
///
/// Generator: {mode: "t2i"|"i2i", prompt, source_ref?} -> {payload_ref}
/// Reviewer:  {prompt, payload_ref} -> {visual, instruction, diagnosis}
class LiveEnvironment final : public Environment
{
public:
    explicit LiveEnvironment(LiveEnvConfig config);

    const LiveEnvConfig& config() const { return _config; }

    Candidate generate(const PromptSpec& prompt, const ActionRecord& action, int turn, Rng& rng) const override;
    Candidate refine(const PromptSpec& prompt, const Candidate& current, const ActionRecord& action, int turn,
                     Rng& rng) const override;
    ReviewerFeedback review(const PromptSpec& prompt, const Candidate& candidate, Rng& rng) const override;

private:
    LiveEnvConfig _config;
};

} // namespace gennav::env
