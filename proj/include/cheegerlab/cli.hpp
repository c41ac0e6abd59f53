#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cheegerlab {

/// Runs the command line (args excludes the program name). Records go to
/// `out` unless --out is given; diagnostics go to `err`.
///
/// Exit codes: 0 all PASS, 1 some FAIL (or an internal numerical failure), 2
/// usage or validation error, including checks run on unsupported spaces, 3
/// INCONCLUSIVE present.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cheegerlab
