#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexreport {

/// Runs the `lexreport` command line. `args` excludes the program name.
/// Returns 0 on success, 1 on a usage error, 2 on a pipeline error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexreport
