#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lcx::cli
{

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 1;
inline constexpr int exit_undecided = 2;
inline constexpr int exit_failed = 3;
inline constexpr int exit_internal = 4;

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// One pass/fail line per acceptance criterion plus the total runtime.
// Returns exit_ok iff every line passes.
int run_acceptance(std::uint64_t seed, std::ostream &out);

} // namespace lcx::cli
