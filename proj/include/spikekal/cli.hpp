#pragma once

#include <iosfwd>

namespace spikekal {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitRuntimeFault = 3,
};

/// Entry point of the `spikekal` tool. Subcommands: simulate, run,
/// compare, checkpoint, uav-synth. Outputs already written when a fault
/// occurs are left in place.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spikekal
