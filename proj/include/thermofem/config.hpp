#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "thermofem/mms.hpp"
#include "thermofem/scenarios.hpp"

namespace thermofem {

struct MmsRunConfig {
    std::string name = "mms";
    ConvergenceConfig study;
    std::filesystem::path output_dir = "results";
};

/// Parsers for the JSON run configurations. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the offending JSON path.
MmsRunConfig parse_mms_config(std::string_view text);
ScenarioConfig parse_scenario_config(std::string_view text);

MmsRunConfig load_mms_config(const std::filesystem::path& path);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Resolved settings as JSON, for dry runs.
std::string describe(const MmsRunConfig& config);
std::string describe(const ScenarioConfig& config);

/// Output directory after applying the THERMOFEM_OUTPUT_DIR override:
/// <override>/<name> when the variable is set and non-empty, else `configured`.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured,
                                         const std::string& name);

}  // namespace thermofem
