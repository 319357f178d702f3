#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rssloc::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,
};

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
///
///   build-map --scenario PATH --out FILE [--draws N] [--seed N]
///   run       --scenario PATH --out DIR [--strategies rand,sdp,fp] [--map FILE]
///             [--seed N] [--jobs N] [--grid-res M] [--poor-geometry R]
///   compare   SUMMARY... [--out FILE]
///
/// The seed falls back to $RSSLOC_SEED, then to the scenario's own seed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rssloc::cli
