#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sdk/config.hpp"

namespace sdk {

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::string config_source = "preset:paper-2013";
    int threads = 1;
    // Recorded in every output; no subcommand currently draws random numbers.
    unsigned long long seed = 0;
};

std::vector<std::string> subcommand_names();

// Runs one subcommand and writes its tables plus manifest.json into
// options.out_dir. On failure every file written so far is removed and the
// error is rethrown. Returns the written paths.
std::vector<std::filesystem::path> run_subcommand(const std::string& name, const RunConfig& config,
                                                  const RunOptions& options);

} // namespace sdk
