#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpmpm::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 internal failure, 2 configuration error,
// 3 data, format, schema or I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Same, with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpmpm::cli
