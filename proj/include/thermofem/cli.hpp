#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace thermofem {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

struct RunOptions {
    std::optional<std::size_t> jobs;  // overrides the config when set
    bool dry_run = false;
};

/// Convergence study: writes <name>.csv and <name>_plot.dat to the output directory.
int cmd_mms(const std::filesystem::path& config, const RunOptions& options, std::ostream& out,
            std::ostream& err);

/// Scenario run: snapshots plus <name>_summary.json.
int cmd_scenario(const std::filesystem::path& config, const RunOptions& options, std::ostream& out,
                 std::ostream& err);

struct MeshgenOptions {
    std::optional<long long> unit_square;
    std::optional<double> focused_h;
    std::filesystem::path output = "mesh.txt";
};

int cmd_meshgen(const MeshgenOptions& request, std::ostream& out, std::ostream& err);

}  // namespace thermofem
