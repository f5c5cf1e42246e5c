#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpsc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kValidationError = 2;

// Full command line (without the program name); errors are reported on `err`
// as `ERROR:<code>: message`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpsc::cli
