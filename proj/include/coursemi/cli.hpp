#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coursemi::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kNumeric = 3;

// Parses `args` (without the program name) and runs one command. Errors are
// reported on `err` and mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coursemi::cli
