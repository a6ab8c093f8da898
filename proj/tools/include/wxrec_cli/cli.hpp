#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wxrec::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, internal_error = 3 };

/// Runs one invocation. `args` excludes the program name. Data goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wxrec::cli
