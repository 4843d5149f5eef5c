#pragma once

// Command-line front end: hwiener kernel | sample | cylinder | fk | validate.
//
// Every subcommand accepts --config FILE (key = value) and --set KEY=VALUE;
// dedicated flags are shorthands for keys and override the file.
//
// Exit codes: 0 success, 1 usage error, 2 configuration error, 3 numerical
// failure, 4 acceptance failure. Failures also write a JSON error record
// to the error stream.

#include <ostream>
#include <string>
#include <vector>

namespace hwiener::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitAcceptance = 4,
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace hwiener::harness
