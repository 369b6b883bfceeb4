#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facetview {

/// Runs the `facetview` command line. `args` excludes the program name.
/// Results go to `out` as JSON, errors to `err` as an error document.
/// Exit status: 0 success, 1 invalid input or usage, 2 file, network or
/// upstream failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace facetview
