#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causalrisk::cli {

// Runs one invocation; args exclude the program name. Returns the process exit code:
// 0 success, 1 usage, 2 data error, 3 learner failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causalrisk::cli
