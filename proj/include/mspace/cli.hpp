#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msp {

// Runs one command line (without the program name).  Reports go to `out`,
// diagnostics to `err`.  Exit codes: 0 ok, 1 usage error, 2 invariant
// failure, 3 budget exceeded.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace msp
