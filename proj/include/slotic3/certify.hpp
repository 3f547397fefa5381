#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slotic3/aiger.hpp"
#include "slotic3/cube.hpp"
#include "slotic3/encode.hpp"

namespace slotic3::certify {

/// Inductive invariant candidate Inv(x) = P(x) and all clauses.
struct Certificate {
  std::vector<Clause> clauses;

  /// Sorts and deduplicates the clause list.
  void normalize();
  bool operator==(const Certificate&) const = default;
};

/// Counterexample: initial latch values and one input vector per step.
struct Witness {
  std::size_t property_index = 0;
  aiger::Bits initial_state;
  std::vector<aiger::Bits> input_frames;
  bool operator==(const Witness&) const = default;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `IC3CERT 1` / `clauses N` / N lines of signed 1-based latch indices
/// terminated by 0.
std::string write_certificate(const Certificate& cert);
Certificate parse_certificate(std::string_view text);

/// AIGER witness: `1`, `b<prop>`, latch bits, one input line per step, `.`.
std::string write_witness(const Witness& w);
Witness parse_witness(std::string_view text);

struct CheckResult {
  bool ok = true;
  /// "format", "initiation", "consecution", "safety" for certificates;
  /// "width", "initial", "bad" for witnesses.
  std::string obligation;
  std::string reason;
  /// Counterexample state for a failed certificate obligation (current
  /// copy; for consecution, the CTI state).
  std::optional<aiger::Bits> state;
  std::optional<aiger::Bits> inputs;
  /// Witness failures: the step at which replay stopped.
  std::optional<std::size_t> step;

  static CheckResult pass() { return {}; }
  static CheckResult fail(std::string obligation, std::string reason) {
    CheckResult r;
    r.ok = false;
    r.obligation = std::move(obligation);
    r.reason = std::move(reason);
    return r;
  }
};

/// Checks initiation (I and not Inv), consecution (Inv and T and not
/// Inv'), and safety (Inv and not P), each UNSAT on a fresh solver.
CheckResult check_certificate(const TransitionSystem& ts, const Certificate& cert);

/// Replays the witness with aiger::simulate_step; OK iff the initial state
/// satisfies I and bad is raised at some step.
CheckResult replay_witness(const TransitionSystem& ts, const Witness& w);

}  // namespace slotic3::certify
