#pragma once

#include <string>
#include <vector>

namespace panelsde::cli {

// Parses and executes one command line. Returns the process exit code:
// 0 success, 2 usage or input error, 3 numerical failure.
int run(int argc, const char* const* argv);

// As above, args excluding the program name. Used by the CLI tests.
int run(const std::vector<std::string>& args);

}  // namespace panelsde::cli
