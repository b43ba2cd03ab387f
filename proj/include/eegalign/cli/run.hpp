#pragma once

#include <iosfwd>
#include <string>

#include "eegalign/cli/config.hpp"
#include "eegalign/error.hpp"

namespace eegalign::cli {

// Runs one parsed command, writing artifacts and run.json under config.out.
// `stage` tracks progress so a failure can be attributed. Returns the
// one-line summary.
std::string execute(RunConfig config, std::string& stage);

// error: stage=<stage> kind=<kind> message="<escaped>"
std::string error_line(const std::string& stage, const std::string& kind, const std::string& message);

// Full entry point: argument parsing, execution, summary on `out`, single-line
// error on `err`. Returns the process exit status.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eegalign::cli
