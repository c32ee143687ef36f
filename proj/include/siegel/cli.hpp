#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace siegel::cli {

enum ExitStatus : int {
    ok = 0,
    precondition = 2,
    verification_failed = 3,
    io = 4,
};

/// Parses `args` (without the program name), runs the subcommand and writes
/// the report to `out` in the requested format. Diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace siegel::cli
