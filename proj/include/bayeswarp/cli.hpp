#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayeswarp {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_runtime = 3 };

/// Subcommands: simulate, align-bayes, align-dp, replicate-study, diagnostics.
/// Precedence: defaults < environment < flags and --set < --config file.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace bayeswarp
