#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vkr::cli {

enum ExitCode { kOk = 0, kError = 1, kSolverFailure = 2, kHypothesis = 3, kUsage = 64 };

const std::vector<std::string>& subcommands();
std::string usage();
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vkr::cli
