#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ineq::cli {

enum ExitCode : int { ok = 0, usage_error = 1, numerical_error = 2 };

/// Entry point behind the `ineq` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ineq::cli
