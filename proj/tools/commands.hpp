#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace topspec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFalsified = 1;
inline constexpr int kExitConfig = 2;

const char* version();

/// The header embedded as the first line of every output file.
nlohmann::json header(const std::string& command, const RunConfig& cfg);

/// Runs a subcommand (spectrum, verify, chi, evt, sample) and returns the exit code.
int run(const std::string& command, const RunConfig& cfg);

/// Reads the header of an output file and returns (command, config).
std::pair<std::string, nlohmann::json> read_header(const std::string& path);

}  // namespace topspec::cli
