#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace digitflux {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;  // ill-posed recursion, invalid transducer, unsupported input
inline constexpr int kExitUsage = 2;

// Runs `digitflux <command> ...`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace digitflux
