#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nlslab {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_numerical = 2,
    exit_property = 3,
};

/// Runs one subcommand.  args excludes the program name.  The JSON summary
/// goes to `out`, diagnostics to `err`; artifacts go to the output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output directory used when --out is absent.
std::string default_output_dir();

} // namespace nlslab
