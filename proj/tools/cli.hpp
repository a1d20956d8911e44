#ifndef QFSUM_TOOLS_CLI_HPP_
#define QFSUM_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace qfsum::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfsum::cli

#endif  // QFSUM_TOOLS_CLI_HPP_
