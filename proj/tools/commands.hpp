#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace naqs::cli {

// Exit codes: 0 success, 2 config error, 3 missing artifact, 4 unsupported
// combination, 5 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissing = 3;
inline constexpr int kExitUnsupported = 4;
inline constexpr int kExitNumerical = 5;

// Runs one command: argv = {"naqs", command, flags...}. Progress and errors
// go to `log`; result files are written per the config and --out/--format.
int run_cli(const std::vector<std::string>& argv, std::ostream& log);

int run_cli_main(int argc, char** argv);

} // namespace naqs::cli
