#pragma once

// Command-line front end shared by the `bellforge` binary and the tests.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace bellforge::cli {

inline constexpr int kSchemaVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;      // usage, schema or file errors
inline constexpr int kExitNumerical = 3;  // a tolerance check failed

/// Runs one subcommand. `args` excludes the program name. JSON goes to `out`,
/// diagnostics to `err`; `in` is read when a file argument is "-".
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace bellforge::cli
