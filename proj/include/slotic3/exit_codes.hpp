#pragma once

namespace slotic3 {

/// Exit codes shared by every subcommand and by every solver the harness
/// runs. `certify` and `replay` use 0 for valid and 1 for invalid.
enum ExitCode : int { kExitSafe = 0, kExitUnsafe = 1, kExitTimeout = 2, kExitUsage = 3, kExitError = 4 };

}  // namespace slotic3
