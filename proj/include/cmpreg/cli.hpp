#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmpreg::cli {

// Exit codes shared by all subcommands.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kDesignError = 3;
inline constexpr int kConvergenceWarning = 4;

// Full command-line entry point (everything after argv[0]); writes results
// to out and diagnostics to err.  Kept in the library so tests can drive
// argument handling and exit codes in-process.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cmpreg::cli
