#include "slotic3/certify.hpp"

#include <algorithm>
#include <sstream>

#include "slotic3/sat.hpp"

namespace slotic3::certify {

void Certificate::normalize() {
  std::sort(clauses.begin(), clauses.end());
  clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
}

std::string write_certificate(const Certificate& cert) {
  std::string out = "IC3CERT 1\nclauses " + std::to_string(cert.clauses.size()) + "\n";
  for (const auto& c : cert.clauses) {
    for (auto l : c) out += std::to_string(l.to_signed()) + ' ';
    out += "0\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t p = 0;
  while (p <= text.size()) {
    auto nl = text.find('\n', p);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string line(text.substr(p, end - p));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    p = nl + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

long to_long(const std::string& tok, std::size_t line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw FormatError("line " + std::to_string(line) + ": expected integer, got '" + tok + "'");
  return v;
}

}  // namespace

Certificate parse_certificate(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty() || tokens(lines[0]) != std::vector<std::string>{"IC3CERT", "1"})
    throw FormatError("line 1: expected 'IC3CERT 1'");
  if (lines.size() < 2) throw FormatError("line 2: missing clause count");
  auto hdr = tokens(lines[1]);
  if (hdr.size() != 2 || hdr[0] != "clauses") throw FormatError("line 2: expected 'clauses N'");
  long n = to_long(hdr[1], 2);
  if (n < 0) throw FormatError("line 2: negative clause count");
  if (lines.size() != static_cast<std::size_t>(n) + 2)
    throw FormatError("expected " + std::to_string(n) + " clause lines, found " + std::to_string(lines.size() - 2));
  Certificate cert;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto toks = tokens(lines[i]);
    if (toks.empty() || toks.back() != "0") throw FormatError("line " + std::to_string(i + 1) + ": clause must end with 0");
    std::vector<StateLit> lits;
    for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
      long v = to_long(toks[k], i + 1);
      if (v == 0) throw FormatError("line " + std::to_string(i + 1) + ": 0 inside clause");
      lits.push_back(StateLit::from_signed(v));
    }
    try {
      cert.clauses.emplace_back(std::move(lits));
    } catch (const std::invalid_argument& e) {
      throw FormatError("line " + std::to_string(i + 1) + ": tautological clause (" + e.what() + ")");
    }
  }
  cert.normalize();
  return cert;
}

std::string write_witness(const Witness& w) {
  std::string out = "1\nb" + std::to_string(w.property_index) + "\n";
  for (bool b : w.initial_state) out.push_back(b ? '1' : '0');
  out.push_back('\n');
  for (const auto& f : w.input_frames) {
    for (bool b : f) out.push_back(b ? '1' : '0');
    out.push_back('\n');
  }
  out += ".\n";
  return out;
}

Witness parse_witness(std::string_view text) {
  auto lines = split_lines(text);
  auto bits = [](const std::string& line, std::size_t lineno) {
    aiger::Bits b;
    for (char ch : line) {
      if (ch == '0' || ch == 'x')
        b.push_back(false);
      else if (ch == '1')
        b.push_back(true);
      else if (ch == ' ' || ch == '\t')
        continue;
      else
        throw FormatError("line " + std::to_string(lineno) + ": unexpected character '" + ch + "'");
    }
    return b;
  };
  if (lines.size() < 4) throw FormatError("witness too short");
  if (tokens(lines[0]) != std::vector<std::string>{"1"}) throw FormatError("line 1: expected '1'");
  auto prop = tokens(lines[1]);
  if (prop.size() != 1 || prop[0].size() < 2 || prop[0][0] != 'b') throw FormatError("line 2: expected 'b<index>'");
  long idx = to_long(prop[0].substr(1), 2);
  if (idx < 0) throw FormatError("line 2: negative property index");
  if (tokens(lines.back()) != std::vector<std::string>{"."}) throw FormatError("missing terminating '.'");
  Witness w;
  w.property_index = static_cast<std::size_t>(idx);
  w.initial_state = bits(lines[2], 3);
  for (std::size_t i = 3; i + 1 < lines.size(); ++i) w.input_frames.push_back(bits(lines[i], i + 1));
  return w;
}

namespace {

aiger::Bits values(const sat::SolveOutcome& m, const std::vector<sat::Lit>& lits) {
  aiger::Bits b;
  for (auto l : lits) b.push_back(m.value(l));
  return b;
}

// Asserts (extra OR not C_1 OR ... OR not C_m) over the given state copy.
void assert_negated_invariant(sat::Solver& s, const std::vector<Clause>& clauses,
                              const std::vector<sat::Lit>& state, sat::Lit extra) {
  std::vector<sat::Lit> big{extra};
  for (const auto& c : clauses) {
    sat::Lit d(s.new_var(), false);
    for (auto l : c) {
      sat::Lit x = l.negated() ? ~state[l.latch()] : state[l.latch()];
      s.add_clause({~d, ~x});
    }
    big.push_back(d);
  }
  s.add_clause(big);
}

void assert_clauses(sat::Solver& s, const std::vector<Clause>& clauses, const std::vector<sat::Lit>& state) {
  for (const auto& c : clauses) {
    std::vector<sat::Lit> lits;
    for (auto l : c) lits.push_back(l.negated() ? ~state[l.latch()] : state[l.latch()]);
    s.add_clause(lits);
  }
}

}  // namespace

CheckResult check_certificate(const TransitionSystem& ts, const Certificate& cert) {
  for (const auto& c : cert.clauses)
    for (auto l : c)
      if (l.latch() >= ts.num_latches())
        return CheckResult::fail("format", "clause references unknown latch " + std::to_string(l.latch() + 1));

  {
    sat::Solver s;
    auto e = build_encoding(ts, s, {.primed_bad = false});
    for (auto l : ts.init()) s.add_clause({e.cur_lit(l)});
    assert_negated_invariant(s, cert.clauses, e.cur, e.bad_cur);
    auto r = s.solve();
    if (r.sat()) {
      auto f = CheckResult::fail("initiation", "an initial state violates the invariant");
      f.state = values(r, e.cur);
      f.inputs = values(r, e.inp);
      return f;
    }
  }
  {
    sat::Solver s;
    auto e = build_encoding(ts, s);
    assert_clauses(s, cert.clauses, e.cur);
    s.add_clause({~e.bad_cur});
    assert_negated_invariant(s, cert.clauses, e.nxt, e.bad_nxt);
    auto r = s.solve();
    if (r.sat()) {
      auto f = CheckResult::fail("consecution", "invariant is not closed under the transition relation");
      f.state = values(r, e.cur);
      f.inputs = values(r, e.inp);
      return f;
    }
  }
  {
    sat::Solver s;
    auto e = build_encoding(ts, s, {.primed_bad = false});
    assert_clauses(s, cert.clauses, e.cur);
    s.add_clause({~e.bad_cur});
    auto r = s.solve({e.bad_cur});
    if (r.sat()) {
      auto f = CheckResult::fail("safety", "invariant admits a bad state");
      f.state = values(r, e.cur);
      return f;
    }
  }
  return CheckResult::pass();
}

CheckResult replay_witness(const TransitionSystem& ts, const Witness& w) {
  const auto& c = ts.circuit();
  if (w.property_index != ts.property_index())
    return CheckResult::fail("width", "witness is for property " + std::to_string(w.property_index) +
                                          ", checking property " + std::to_string(ts.property_index()));
  if (w.initial_state.size() != c.latches.size())
    return CheckResult::fail("width", "initial state has " + std::to_string(w.initial_state.size()) +
                                          " bits, circuit has " + std::to_string(c.latches.size()) + " latches");
  for (std::size_t t = 0; t < w.input_frames.size(); ++t)
    if (w.input_frames[t].size() != c.inputs.size()) {
      auto f = CheckResult::fail("width", "input frame " + std::to_string(t) + " has " +
                                              std::to_string(w.input_frames[t].size()) + " bits, circuit has " +
                                              std::to_string(c.inputs.size()) + " inputs");
      f.step = t;
      return f;
    }
  for (std::size_t i = 0; i < c.latches.size(); ++i) {
    const auto& l = c.latches[i];
    if (!l.uninitialized() && w.initial_state[i] != (l.reset == 1)) {
      auto f = CheckResult::fail("initial", "latch " + std::to_string(i + 1) + " violates its reset value");
      f.step = 0;
      return f;
    }
  }
  aiger::Bits state = w.initial_state;
  if (w.input_frames.empty()) {
    auto r = aiger::simulate_step(c, state, aiger::Bits(c.inputs.size(), false), ts.property_index());
    if (r.bad) return CheckResult::pass();
  }
  for (std::size_t t = 0; t < w.input_frames.size(); ++t) {
    auto r = aiger::simulate_step(c, state, w.input_frames[t], ts.property_index());
    if (r.bad) return CheckResult::pass();
    state = std::move(r.next_state);
  }
  auto f = CheckResult::fail("bad", "bad never raised");
  f.step = w.input_frames.size();
  f.state = state;
  return f;
}

}  // namespace slotic3::certify
