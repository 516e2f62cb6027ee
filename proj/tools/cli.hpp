#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sumforge::cli {

// args excludes the program name. Returns 0 on success, 1 on domain errors
// and 2 on usage errors; reports go to `out`, logs and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sumforge::cli
