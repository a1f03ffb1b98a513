#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nelliptic {

/// Exit codes of run().
constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;

/// Command-line entry point; args excludes the program name. Reports go to
/// `out` as JSON lines, usage text and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nelliptic
