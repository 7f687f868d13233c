#pragma once

#include <filesystem>
#include <string>

#include "efs/harness.hpp"
#include "efs/synthgen.hpp"

namespace efs {

struct SynthSettings {
    std::string profile = "paper"; // paper, recovery or custom
    std::uint64_t seed = 0;
    // recovery profile
    std::size_t m = 200;
    std::size_t feature_count = 40;
    std::size_t planted_count = 5;
    double effect = 1.0;
    // custom profile
    SynthSpec spec;

    [[nodiscard]] SynthSpec resolve() const;
};

struct RunConfig {
    std::filesystem::path data;
    std::filesystem::path metadata;
    std::filesystem::path output = "out";
    HarnessConfig harness;
    SynthSettings synth;
};

// YAML; unknown keys and wrong types raise Error{InvalidConfig} with a
// "<origin>:<line>:<column>: " prefix.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Effective configuration in the same format. The output directory and the
// job count are left out; neither affects results.
std::string dump_run_config(const RunConfig& config);

} // namespace efs
