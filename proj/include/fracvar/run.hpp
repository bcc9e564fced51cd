#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fracvar/config.hpp"

namespace fracvar {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNotConverged = 3,
  kExitIo = 4,
};

const std::vector<std::string>& subcommands();

/// Executes one pipeline and writes its artifacts under cfg.output:
/// config_echo, then the solution/trace/summary files of the command.
/// Progress and wallclock go to `out`, diagnostics to `err`.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace fracvar
