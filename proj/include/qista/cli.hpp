#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qista::cli {

/// Runs one command line. `args` excludes the program name.
/// Returns 0 on success, 2 on a usage error, 1 on a runtime failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

}  // namespace qista::cli
