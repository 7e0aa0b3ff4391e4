#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mw::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;  // Invalid verdict, failed case or divergence alarm
inline constexpr int kUsage = 2;    // bad flags, config or input file

/// Runs one command line (`args` excludes the program name). "-" as a file
/// name means `in`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mw::cli
