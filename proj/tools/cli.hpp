#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ckit::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;

/// Runs `chernoff-kit` with `args` (program name excluded). Results go to
/// `out`, diagnostics to `err`; `in` is read when a job is given as "-".
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace ckit::cli
