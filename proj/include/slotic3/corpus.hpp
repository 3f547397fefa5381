#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slotic3/aiger.hpp"

namespace slotic3::corpus {

/// Incremental AIG construction with constant folding. Latches get their
/// next-state function after creation so feedback loops can be wired.
class CircuitBuilder {
 public:
  aiger::Lit input();
  /// reset: 0, 1, or -1 for uninitialized.
  aiger::Lit latch(int reset = 0);
  void set_next(aiger::Lit latch_lit, aiger::Lit next);

  aiger::Lit and_(aiger::Lit a, aiger::Lit b);
  aiger::Lit or_(aiger::Lit a, aiger::Lit b);
  aiger::Lit xor_(aiger::Lit a, aiger::Lit b);
  aiger::Lit eq(aiger::Lit a, aiger::Lit b) { return aiger::negate(xor_(a, b)); }
  aiger::Lit mux(aiger::Lit sel, aiger::Lit then_, aiger::Lit else_);
  aiger::Lit and_all(const std::vector<aiger::Lit>& xs);
  aiger::Lit or_all(const std::vector<aiger::Lit>& xs);
  /// Word equality against a constant; bit 0 is least significant.
  aiger::Lit equals(const std::vector<aiger::Lit>& word, std::uint64_t value);
  /// word + inc (single carry-in bit), truncated to the word width.
  std::vector<aiger::Lit> increment(const std::vector<aiger::Lit>& word, aiger::Lit inc);

  void bad(aiger::Lit l) { c_.bads.push_back(l); }
  void output(aiger::Lit l) { c_.outputs.push_back(l); }

  aiger::AigerCircuit build() const { return c_; }

 private:
  aiger::Lit fresh() { return 2 * ++c_.max_var; }
  aiger::AigerCircuit c_;
};

struct Instance {
  std::string name;
  aiger::AigerCircuit circuit;
};

/// `bits`-wide counter advancing when its input is 1 and wrapping to 0
/// after `modulus - 1`; bad when the count equals `target`. Unsafe iff
/// target < modulus.
Instance counter(unsigned bits, std::uint64_t modulus, std::uint64_t target);

/// Input-free ripple counter of `bits` toggles; bad when all are 1 (unsafe,
/// reached after 2^bits - 1 steps) or, with `safe`, a complementary toggle
/// pair whose bits would coincide (never).
Instance toggle(unsigned bits, bool safe);

/// Shift register fed by an input. Unsafe: bad when every stage holds 1.
/// Safe: two registers fed the same input, bad when any stage differs.
Instance shift(unsigned stages, bool safe);

/// Two counters sharing an enable input, bad when they differ. With
/// `skew`, the second counter saturates instead of wrapping, so they
/// eventually diverge (unsafe).
Instance equal_counters(unsigned bits, bool skew);

/// Random AIG: latches with random reset values (some uninitialized),
/// random AND gates, random next-state functions, bad = AND of a few
/// random signals.
Instance random_aig(std::uint64_t seed, unsigned latches, unsigned inputs, unsigned ands);

/// Mixed corpus of small circuits (at most `max_latches` latches) suitable
/// for explicit-state cross-checking.
std::vector<Instance> small_corpus(std::uint64_t seed, std::size_t count, unsigned max_latches = 12);

/// Wrapping counters of 6-9 bits (mostly safe, every sixth unsafe) whose
/// proofs need hundreds of frames, so clause pushing dominates the run.
std::vector<Instance> case_study_corpus(std::uint64_t seed, std::size_t count);

}  // namespace slotic3::corpus
