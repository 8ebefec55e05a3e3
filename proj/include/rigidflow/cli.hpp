#pragma once

#include <string>
#include <vector>

namespace rigidflow::cli {

// Exit codes: 0 success, 1 verification failure, 2 usage / input errors,
// 3 library errors (the error name is printed on stderr).
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitLibrary = 3;

// Runs one command line (args[0] is the program name). Output paths of "-"
// mean stdout; input paths of "-" mean stdin.
int run(const std::vector<std::string>& args);

}  // namespace rigidflow::cli
