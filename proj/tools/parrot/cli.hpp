#pragma once

#include <iosfwd>
#include <stop_token>
#include <string>
#include <vector>

namespace parrot::cli {

/// Runs one command line (without the program name). Returns the process exit code:
/// 0 on success, 1 on usage or validation errors, 2 on I/O or endpoint failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            std::stop_token stop = {});

}  // namespace parrot::cli
