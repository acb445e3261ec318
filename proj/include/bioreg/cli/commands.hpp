#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bioreg::cli {

// Exit codes of the tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one invocation. args[0] is the program name. Help goes to `out`;
/// failures print a single "<Category>: <message>" line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bioreg::cli
