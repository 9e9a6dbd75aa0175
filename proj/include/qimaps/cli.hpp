#pragma once

#include <ostream>

namespace qimaps {

/// Command-line entry point. Exit codes: 0 pass, 1 fail, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qimaps
