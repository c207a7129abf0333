#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msle::cli {

/// Entry point of the `msle` command line. Exit codes: 0 success, 1 invalid
/// input (one-line diagnostic), 2 numerical failure (error JSON on stderr).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msle::cli
