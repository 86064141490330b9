#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace duat::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

/// Runs one subcommand (build-graph, train, eval, sweep, ablate). `args`
/// excludes the program name. Summaries go to `out`; failures print a single
/// "error: ..." line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace duat::cli
