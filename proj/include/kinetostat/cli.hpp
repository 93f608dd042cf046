#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kinetostat {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitModel = 3,
    kExitNonConvergence = 4,
    kExitSingularity = 5,
};

/// Entry point of the kinetostat tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinetostat
