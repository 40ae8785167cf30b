#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace llmprint::cli {

/// Runs `llmprint <args...>` (args exclude the program name) and returns
/// the process exit code: 0 on success, 1 when a stage fails, 2 on usage
/// errors. Results go to `out`, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Splices the JSON object in `--config <file>` in front of the command
/// line as `--key value` flags. Keys given explicitly on the command line
/// win. `simulate` reads its own experiment config and is left unchanged.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace llmprint::cli
