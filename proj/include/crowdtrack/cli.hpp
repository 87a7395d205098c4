#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdtrack {

/// Entry point behind the `crowdtrack` executable. `args` excludes the
/// program name. Returns the process exit status; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace crowdtrack
