#pragma once
// Operator command line. Exit codes: 0 success, 1 data or validation error,
// 2 usage error.

#include <ostream>
#include <string>
#include <vector>

namespace fedfeed {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fedfeed
