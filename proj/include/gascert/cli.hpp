#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gascert::cli {

enum ExitCode : int { kPass = 0, kInputError = 1, kConditionFailed = 2, kDiverged = 3 };

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gascert::cli
