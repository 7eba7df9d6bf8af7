// experiments.hpp — named scenarios binding all modules
//
// A scenario reads one JSON config, runs deterministically under a fixed
// seed, and writes result files plus a manifest into the output directory.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace psim {

inline constexpr const char* kVersion = "0.1.0";

// exit codes shared by the library and the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitToleranceError = 3;
inline constexpr int kExitResourceLimit = 4;

struct RunOptions {
    std::optional<std::string> output_dir; // overrides config "output_dir"
    int workers = 1;                       // caps threads, never changes results
    std::vector<std::pair<std::string, std::string>> overrides; // --set key=value
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
    std::filesystem::path output_dir;
    nlohmann::ordered_json manifest;
};

// throws ConfigError on malformed or unknown configs
void validate_experiment_config(const nlohmann::ordered_json& config);

// applies overrides, validates, runs the scenario, writes results + manifest
RunOutcome run_experiment(nlohmann::ordered_json config, const RunOptions& options = {});

RunOutcome run_experiment_file(const std::filesystem::path& config_path,
                               const RunOptions& options = {});

} // namespace psim
