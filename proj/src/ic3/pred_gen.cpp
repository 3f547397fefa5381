// pred_gen slot: shrinking a predecessor state to a cube.
#include <algorithm>

#include "slotic3/ic3.hpp"

namespace slotic3::ic3 {

Cube Engine::pred_gen(const sat::SolveOutcome& model, std::size_t /*j*/, const Cube& s) {
  auto full = state_of(enc_, model);
  const auto& policy = opts_.policies.pred_gen;
  if (policy.variant == "none") return full;
  if (policy.variant != "lift") throw PolicyError("unsupported pred_gen variant " + policy.variant);
  auto in = inputs_of(enc_, model);
  return keep_initiation(lift(full, in, nullptr, &s), full);
}

// With the inputs fixed, finds the latch literals of `state` that already
// force the successor into `target` (or force bad' when target is null).
Cube Engine::lift(const Cube& state, const aiger::Bits& inputs, const aiger::Bits* bad_inputs, const Cube* target) {
  poll_deadline();
  ++stats_.lift_queries;
  sat::Lit act(lift_.new_var(), false);
  std::vector<sat::Lit> goal{~act};
  if (target) {
    for (auto l : *target) goal.push_back(~lift_enc_.nxt_lit(l));
  } else {
    goal.push_back(~lift_enc_.bad_nxt);
  }
  lift_.add_clause(goal);

  std::vector<sat::Lit> a{act};
  for (std::size_t i = 0; i < inputs.size(); ++i) a.push_back(inputs[i] ? lift_enc_.inp[i] : ~lift_enc_.inp[i]);
  if (bad_inputs)
    for (std::size_t i = 0; i < bad_inputs->size(); ++i)
      a.push_back((*bad_inputs)[i] ? lift_enc_.inp_nxt[i] : ~lift_enc_.inp_nxt[i]);
  const auto first_latch = a.size();
  auto latch_lits = unprimed(lift_enc_, state);
  if (opts_.policies.pred_gen.variant == "lift" && opts_.policies.pred_gen.param("reverse") != 0)
    std::reverse(latch_lits.begin(), latch_lits.end());
  a.insert(a.end(), latch_lits.begin(), latch_lits.end());

  sat::SolveOutcome r;
  try {
    r = solve(lift_, a);
  } catch (...) {
    lift_.add_clause({~act});
    throw;
  }
  lift_.add_clause({~act});
  if (++lift_retired_ % 1000 == 0) lift_.simplify();
  if (r.sat())
    throw std::logic_error("lifting query is satisfiable for state " + state.str() +
                           (target ? " into " + target->str() : std::string(" into bad")));

  std::vector<bool> failed(lift_.num_vars() + 1, false);
  for (auto l : r.failed_assumptions) failed[l.var()] = true;
  std::vector<StateLit> keep;
  for (std::size_t i = first_latch; i < a.size(); ++i)
    if (failed[a[i].var()]) {
      for (auto l : state)
        if (lift_enc_.cur_lit(l) == a[i]) keep.push_back(l);
    }
  return Cube(std::move(keep));
}

// A lifted cube may meet I even though the concrete state does not; adding
// back one literal of the state that contradicts I restores disjointness.
Cube Engine::keep_initiation(Cube cube, const Cube& full_state) {
  if (!intersects_init(cube) || intersects_init(full_state)) return cube;
  for (auto l : full_state)
    if (ts_.init().contains(~l)) {
      std::vector<StateLit> lits(cube.begin(), cube.end());
      lits.push_back(l);
      return Cube(std::move(lits));
    }
  return cube;
}

}  // namespace slotic3::ic3
