#pragma once

#include <iosfwd>

namespace hrnv::cli {

/// Exit codes of `run`.
inline constexpr int kSuccess = 0;
inline constexpr int kRecordFailure = 1;
inline constexpr int kUsageError = 2;

/// Entry point of the `hrnv` command. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hrnv::cli
