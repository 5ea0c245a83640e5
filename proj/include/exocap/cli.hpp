#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace exocap {

/// Entry point behind the `exocap` executable. Returns the process exit code;
/// failures print one `error: <Category>: <message>` line to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exocap
