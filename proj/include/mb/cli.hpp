#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mb::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;     // computation failed, or a demo check did not hold
inline constexpr int pathology = 2;   // a demo exhibited the pathology it exists to show
inline constexpr int usage = 64;
inline constexpr int data_error = 65; // model source, bindings or scales
inline constexpr int no_input = 66;
inline constexpr int cant_create = 73;
} // namespace exit_code

/// Runs one command. args excludes the program name. Reports go to `out`
/// (or to --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mb::cli
