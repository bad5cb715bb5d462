#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace depbound {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitInfeasible = 3,
    kExitNonConvergence = 4,
};

struct RunConfig {
    std::string subcommand;
    std::string table;  // reproduce only
    std::filesystem::path config;
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    bool strict = false;
    std::size_t threads = 0;
    int verbosity = 0;
};

int cmd_standard(const RunConfig& run);
int cmd_prescription(const RunConfig& run);
int cmd_distance_ball(const RunConfig& run);
int cmd_extremal(const RunConfig& run);
int cmd_reproduce(const RunConfig& run);

/// Dispatches a parsed run and maps exceptions to exit codes.
int execute(const RunConfig& run);

/// Full command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace depbound
