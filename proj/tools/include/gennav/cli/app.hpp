// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gennav/cli/settings.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gennav::cli {

/// A fully resolved invocation: everything needed to re-derive its outputs.
struct RunSpec
{
    std::string subcommand;
    Settings settings;
    std::map<std::string, std::string> inputs; ///< role -> path
    std::string output_name;                   ///< report file name (audit-contamination only)
};

struct OutputFile
{
    std::string name;
    std::string contents;
};

/// Runs a subcommand in memory. Output names are relative to the output location.
std::vector<OutputFile> execute(const RunSpec& spec, std::ostream& log);

/// Writes outputs plus manifest into `dir`; removes what it wrote if any write fails.
/// `manifest_name` is "manifest.json" or "<report>.manifest.json".
void publish(const RunSpec& spec, const std::vector<OutputFile>& outputs, const std::filesystem::path& dir,
             const std::string& manifest_name);

std::string manifest_json(const RunSpec& spec, const std::vector<OutputFile>& outputs);
RunSpec spec_from_manifest(const std::string& manifest_text, std::map<std::string, std::string>* input_hashes,
                           std::map<std::string, std::string>* output_hashes);

/// Entry point; returns 0 ok, 1 runtime failure, 2 usage or input error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace gennav::cli
