#pragma once

#include <iosfwd>

namespace oam::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kIncompleteData = 3,
  kNotCertified = 4,
};

/// Default seed when --seed is absent.
inline constexpr const char* kSeedEnv = "OAM332_SEED";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oam::cli
