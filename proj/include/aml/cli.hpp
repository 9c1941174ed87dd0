#pragma once

#include <ostream>

namespace aml {

/// Entry point of the `aml` command-line tool. Returns the process exit code:
/// 0 on success, 2 for configuration or usage errors, 1 for runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aml
