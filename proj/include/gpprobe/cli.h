#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gpprobe {

// Runs the command line `args` (without the program name). Returns the
// process exit status: 0 success, 1 validation or usage error, 2 I/O error.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpprobe
