#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cqreg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

/// Runs the tool with `args` (program name excluded). `in` stands in for
/// stdin when an input path is "-"; results without an --output path go to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace cqreg
