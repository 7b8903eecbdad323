#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clnx {

/// Command-line entry point. `args` excludes the program name. Results go
/// to `out`, diagnostics to `err`. Returns 0 on success, 1 when processing
/// fails and 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clnx
