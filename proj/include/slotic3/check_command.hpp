#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "slotic3/encode.hpp"
#include "slotic3/exit_codes.hpp"
#include "slotic3/ic3.hpp"
#include "slotic3/policy.hpp"

namespace slotic3::cli {

struct CheckRequest {
  std::filesystem::path input;
  std::optional<double> timeout_sec;
  std::size_t property = 0;
  PolicySet policies;
  /// Write `<stem>.cert` / `<stem>.cex` into out_dir, or beside the input
  /// when out_dir is empty.
  bool emit_artifacts = false;
  std::filesystem::path out_dir;
  bool verify_lemmas = false;
  /// Main solver clause database after the run, for external cross-checks.
  std::filesystem::path dimacs_out;
};

/// Customization points for standalone solver builds.
struct CheckHooks {
  /// Runs before the engine; a returned verdict replaces the IC3 run.
  std::function<std::optional<ic3::Verdict>(const TransitionSystem&)> shortcut;
  /// Runs after the engine returns and before anything is printed.
  std::function<void(const TransitionSystem&, ic3::Verdict&)> after_check;
};

/// Prints `RESULT: ...` and the HYP counters to `out`, diagnostics to `err`,
/// and returns the exit code.
int run_check(const CheckRequest& req, std::ostream& out, std::ostream& err, const CheckHooks& hooks = {});

/// Entry point for a solver binary that only knows `check`:
/// `prog [check] <input> [--timeout s] [--policy spec]... [--emit-artifacts]
/// [--out dir] [--property n] [--verify-lemmas] [--dump-dimacs file]`.
int check_main(int argc, char** argv, const PolicySet& defaults = {}, const CheckHooks& hooks = {});

}  // namespace slotic3::cli
