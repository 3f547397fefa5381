#include "slotic3/encode.hpp"

#include <stdexcept>

namespace slotic3 {

TransitionSystem::TransitionSystem(std::shared_ptr<const aiger::AigerCircuit> circuit, std::size_t property)
    : circuit_(std::move(circuit)), property_(property) {
  const auto& props = circuit_->properties();
  if (props.empty()) throw std::invalid_argument("circuit has no output or bad-state property");
  if (property >= props.size())
    throw std::invalid_argument("property index " + std::to_string(property) + " out of range (" +
                                std::to_string(props.size()) + " properties)");
  bad_ = props[property];
  std::vector<StateLit> init;
  for (std::uint32_t i = 0; i < circuit_->latches.size(); ++i) {
    const auto& l = circuit_->latches[i];
    if (!l.uninitialized()) init.emplace_back(i, l.reset == 0);
  }
  init_ = Cube(std::move(init));
}

sat::Lit CnfEncoding::activation(std::size_t frame, sat::Solver& solver) {
  while (frame_act.size() <= frame) frame_act.emplace_back(solver.new_var(), false);
  return frame_act[frame];
}

namespace {

class GateEncoder {
 public:
  GateEncoder(const aiger::AigerCircuit& c, sat::Solver& s, sat::Lit t)
      : c_(c), s_(s), true_(t), map_(c.max_var + 1), have_(c.max_var + 1, false) {
    map_[0] = ~t;
    have_[0] = true;
  }

  void bind(aiger::Lit even, sat::Lit l) {
    map_[aiger::var_of(even)] = l;
    have_[aiger::var_of(even)] = true;
  }

  sat::Lit lit(aiger::Lit l) const {
    auto v = aiger::var_of(l);
    if (!have_[v]) throw std::logic_error("AIGER variable " + std::to_string(v) + " not encoded");
    return aiger::is_negated(l) ? ~map_[v] : map_[v];
  }

  // Encodes the ANDs in the cone of `roots`, folding constants.
  void encode_cone(const std::vector<aiger::Lit>& roots) {
    std::vector<bool> need(c_.max_var + 1, false);
    for (auto r : roots) need[aiger::var_of(r)] = true;
    for (auto it = c_.ands.rbegin(); it != c_.ands.rend(); ++it) {
      if (!need[aiger::var_of(it->lhs)]) continue;
      need[aiger::var_of(it->rhs0)] = true;
      need[aiger::var_of(it->rhs1)] = true;
    }
    for (const auto& g : c_.ands) {
      if (!need[aiger::var_of(g.lhs)] || have_[aiger::var_of(g.lhs)]) continue;
      bind(g.lhs, and_of(lit(g.rhs0), lit(g.rhs1)));
    }
  }

 private:
  sat::Lit and_of(sat::Lit a, sat::Lit b) {
    if (a == ~true_ || b == ~true_ || a == ~b) return ~true_;
    if (a == true_) return b;
    if (b == true_ || a == b) return a;
    sat::Lit g(s_.new_var(), false);
    s_.add_clause({~g, a});
    s_.add_clause({~g, b});
    s_.add_clause({g, ~a, ~b});
    return g;
  }

  const aiger::AigerCircuit& c_;
  sat::Solver& s_;
  sat::Lit true_;
  std::vector<sat::Lit> map_;
  std::vector<bool> have_;
};

}  // namespace

CnfEncoding build_encoding(const TransitionSystem& ts, sat::Solver& solver, EncodeOptions opts) {
  const auto& c = ts.circuit();
  CnfEncoding e;
  e.const_true = sat::Lit(solver.new_var(), false);
  solver.add_clause({e.const_true});

  GateEncoder now(c, solver, e.const_true);
  for (auto l : c.latches) {
    e.cur.emplace_back(solver.new_var(), false);
    now.bind(l.current, e.cur.back());
  }
  for (auto in : c.inputs) {
    e.inp.emplace_back(solver.new_var(), false);
    now.bind(in, e.inp.back());
  }
  std::vector<aiger::Lit> roots;
  for (auto& l : c.latches) roots.push_back(l.next);
  roots.push_back(ts.bad());
  now.encode_cone(roots);

  for (auto& l : c.latches) {
    sat::Lit n(solver.new_var(), false);
    sat::Lit f = now.lit(l.next);
    solver.add_clause({~n, f});
    solver.add_clause({n, ~f});
    e.nxt.push_back(n);
  }
  e.bad_cur = now.lit(ts.bad());

  if (opts.primed_bad) {
    GateEncoder primed(c, solver, e.const_true);
    for (std::size_t i = 0; i < c.latches.size(); ++i) primed.bind(c.latches[i].current, e.nxt[i]);
    for (auto in : c.inputs) {
      e.inp_nxt.emplace_back(solver.new_var(), false);
      primed.bind(in, e.inp_nxt.back());
    }
    primed.encode_cone({ts.bad()});
    e.bad_nxt = primed.lit(ts.bad());
  }
  return e;
}

std::vector<sat::Lit> prime(const CnfEncoding& e, const Cube& c) {
  std::vector<sat::Lit> out;
  out.reserve(c.size());
  for (auto l : c) {
    if (l.latch() >= e.nxt.size())
      throw std::invalid_argument("cube literal on unknown latch " + std::to_string(l.latch() + 1));
    out.push_back(e.nxt_lit(l));
  }
  return out;
}

std::vector<sat::Lit> unprimed(const CnfEncoding& e, const Cube& c) {
  std::vector<sat::Lit> out;
  out.reserve(c.size());
  for (auto l : c) {
    if (l.latch() >= e.cur.size())
      throw std::invalid_argument("cube literal on unknown latch " + std::to_string(l.latch() + 1));
    out.push_back(e.cur_lit(l));
  }
  return out;
}

Cube state_of(const CnfEncoding& e, const sat::SolveOutcome& model, bool next) {
  const auto& vars = next ? e.nxt : e.cur;
  std::vector<StateLit> lits;
  lits.reserve(vars.size());
  for (std::uint32_t i = 0; i < vars.size(); ++i) lits.emplace_back(i, !model.value(vars[i]));
  return Cube(std::move(lits));
}

aiger::Bits inputs_of(const CnfEncoding& e, const sat::SolveOutcome& model, bool next) {
  const auto& vars = next ? e.inp_nxt : e.inp;
  aiger::Bits out;
  out.reserve(vars.size());
  for (auto v : vars) out.push_back(model.value(v));
  return out;
}

}  // namespace slotic3
