#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace crsdkit::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

/// Runs one subcommand. args excludes the program name. Never throws; errors
/// are written to err and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a over "command" and the sorted "name=value" pairs, as 16 hex digits.
std::string config_hash(const std::string& command,
                        std::vector<std::pair<std::string, std::string>> options);

}  // namespace crsdkit::cli
