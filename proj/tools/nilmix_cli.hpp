#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nilmix::cli {

/// Runs one invocation; args excludes the program name. Returns the process exit code:
/// 0 success, 2 usage or config error, 3 mathematical precondition failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

} // namespace nilmix::cli
