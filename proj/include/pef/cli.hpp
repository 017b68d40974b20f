#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pef::cli {

/// Runs the `pef` command line. `args` excludes the program name.
/// Exit codes: 0 success, 2 usage, 3 data error, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pef::cli
