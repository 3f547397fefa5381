#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "slotic3/aiger.hpp"
#include "slotic3/cube.hpp"
#include "slotic3/sat.hpp"

namespace slotic3 {

/// <I, T, P> extracted from one property of an AIGER circuit. State
/// variables are the latches (index order), inputs are the primary inputs.
/// P(x) = not bad; `bad` may also read inputs.
class TransitionSystem {
 public:
  TransitionSystem(std::shared_ptr<const aiger::AigerCircuit> circuit, std::size_t property = 0);

  const aiger::AigerCircuit& circuit() const { return *circuit_; }
  std::shared_ptr<const aiger::AigerCircuit> circuit_ptr() const { return circuit_; }

  std::size_t num_latches() const { return circuit_->latches.size(); }
  std::size_t num_inputs() const { return circuit_->inputs.size(); }
  std::size_t property_index() const { return property_; }
  aiger::Lit bad() const { return bad_; }

  /// I as unit literals over latches; uninitialized latches are absent.
  const Cube& init() const { return init_; }

 private:
  std::shared_ptr<const aiger::AigerCircuit> circuit_;
  std::size_t property_;
  aiger::Lit bad_;
  Cube init_;
};

/// Literal maps tying a TransitionSystem to one solver. `cur`/`inp` are the
/// unprimed copy, `nxt` the next-state copy x', and `inp_nxt` a second
/// input copy y' used only to evaluate bad over x'.
struct CnfEncoding {
  std::vector<sat::Lit> cur;
  std::vector<sat::Lit> nxt;
  std::vector<sat::Lit> inp;
  std::vector<sat::Lit> inp_nxt;
  sat::Lit bad_cur;
  sat::Lit bad_nxt;
  sat::Lit const_true;
  /// Activation literal per frame index, created on demand.
  std::vector<sat::Lit> frame_act;

  sat::Lit cur_lit(StateLit l) const { return l.negated() ? ~cur.at(l.latch()) : cur.at(l.latch()); }
  sat::Lit nxt_lit(StateLit l) const { return l.negated() ? ~nxt.at(l.latch()) : nxt.at(l.latch()); }

  sat::Lit activation(std::size_t frame, sat::Solver& solver);
};

struct EncodeOptions {
  /// Also encode bad over the next-state copy (needed for IC3 queries).
  bool primed_bad = true;
};

/// Asserts T(x, y, x') in `solver`: the AND cone of every next-state
/// function and of bad over (x, y), plus x'_i <-> f_i(x, y). With
/// `primed_bad`, bad's cone is encoded again over (x', y').
CnfEncoding build_encoding(const TransitionSystem& ts, sat::Solver& solver, EncodeOptions opts = {});

/// Maps a state cube onto the next-state copy, preserving signs.
std::vector<sat::Lit> prime(const CnfEncoding& e, const Cube& c);
/// Maps a state cube onto the current-state copy.
std::vector<sat::Lit> unprimed(const CnfEncoding& e, const Cube& c);

/// Cube of all latch values in a model, over the current or next copy.
Cube state_of(const CnfEncoding& e, const sat::SolveOutcome& model, bool next = false);
aiger::Bits inputs_of(const CnfEncoding& e, const sat::SolveOutcome& model, bool next = false);

}  // namespace slotic3
