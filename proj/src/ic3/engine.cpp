// Main loop, frame bookkeeping, SAT queries and counterexample
// reconstruction. Heuristic slots live in obligations.cpp, ind_gen.cpp,
// pred_gen.cpp and propagate.cpp.
#include <algorithm>
#include <sstream>

#include "slotic3/ic3.hpp"

namespace slotic3::ic3 {

std::string_view result_name(Result r) {
  switch (r) {
    case Result::Safe: return "SAFE";
    case Result::Unsafe: return "UNSAFE";
    case Result::Timeout: return "TIMEOUT";
  }
  return "?";
}

std::vector<std::pair<std::string, std::string>> Counters::entries() const {
  auto n = [](std::uint64_t v) { return std::to_string(v); };
  std::ostringstream secs;
  secs.precision(3);
  secs << std::fixed << seconds;
  return {
      {"frames", n(frames)},
      {"sat_calls", n(sat_calls)},
      {"ctis", n(ctis)},
      {"obligations", n(obligations)},
      {"stale_obligations", n(stale_obligations)},
      {"predecessors", n(predecessors)},
      {"lemmas", n(lemmas)},
      {"lemma_literals", n(lemma_literals)},
      {"indgen_queries", n(indgen_queries)},
      {"indgen_dropped", n(indgen_dropped)},
      {"lift_queries", n(lift_queries)},
      {"push_rounds", n(push_rounds)},
      {"push_attempts", n(push_attempts)},
      {"push_successes", n(push_successes)},
      {"push_frames_skipped", n(push_frames_skipped)},
      {"push_early_cuts", n(push_early_cuts)},
      {"simplify_calls", n(simplify_calls)},
      {"subsumed", n(subsumed)},
      {"seconds", secs.str()},
  };
}

Engine::Engine(const TransitionSystem& ts, CheckOptions opts)
    : ts_(ts), opts_(std::move(opts)), queue_(opts_.policies.po_handling) {
  start_ = std::chrono::steady_clock::now();
  if (opts_.timeout_sec) {
    deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(*opts_.timeout_sec));
    main_.set_deadline(deadline_);
    lift_.set_deadline(deadline_);
  }
  enc_ = build_encoding(ts_, main_);
  lift_enc_ = build_encoding(ts_, lift_);
  frames_.resize(2);
  enc_.activation(1, main_);
}

void Engine::poll_deadline() const {
  if (deadline_ && std::chrono::steady_clock::now() >= *deadline_) throw TimeoutSignal{};
}

sat::SolveOutcome Engine::solve(sat::Solver& s, const std::vector<sat::Lit>& assumptions) {
  poll_deadline();
  ++stats_.sat_calls;
  auto r = s.solve(assumptions);
  if (r.status == sat::Status::Unknown) throw TimeoutSignal{};
  return r;
}

std::vector<sat::Lit> Engine::frame_assumptions(std::size_t i) {
  std::vector<sat::Lit> a;
  if (i == 0)
    for (auto l : ts_.init()) a.push_back(enc_.cur_lit(l));
  for (std::size_t lvl = std::max<std::size_t>(i, 1); lvl <= top(); ++lvl) a.push_back(enc_.activation(lvl, main_));
  return a;
}

sat::Lit Engine::fresh_activation() { return sat::Lit(main_.new_var(), false); }

void Engine::retire(sat::Lit act) { main_.add_clause({~act}); }

void Engine::extend() {
  frames_.emplace_back();
  enc_.activation(top(), main_);
}

void Engine::add_lemma(const Clause& c, std::size_t lvl) {
  if (lvl == 0 || lvl > top()) throw std::out_of_range("lemma level " + std::to_string(lvl) + " outside 1.." + std::to_string(top()));
  std::vector<sat::Lit> lits{~enc_.activation(lvl, main_)};
  for (auto l : c) lits.push_back(enc_.cur_lit(l));
  main_.add_clause(lits);
  frames_[lvl].push_back(c);
  ++stats_.lemmas;
  stats_.lemma_literals += c.size();
}

std::vector<Clause> Engine::frame(std::size_t i) const {
  std::vector<Clause> out;
  for (std::size_t lvl = std::max<std::size_t>(i, 1); lvl < frames_.size(); ++lvl)
    out.insert(out.end(), frames_[lvl].begin(), frames_[lvl].end());
  return out;
}

std::optional<std::size_t> Engine::fixpoint() const {
  for (std::size_t i = 1; i < top(); ++i)
    if (frames_[i].empty()) return i;
  return std::nullopt;
}

certify::Certificate Engine::certificate(std::size_t i) const {
  certify::Certificate cert{frame(i + 1)};
  cert.normalize();
  return cert;
}

bool Engine::intersects_init(const Cube& s) {
  for (auto l : s)
    if (ts_.init().contains(~l)) return false;
  return true;
}

bool Engine::initiation(const Clause& c) {
  for (auto l : c)
    if (ts_.init().contains(l)) return true;
  return false;
}

bool Engine::frame_intersects(std::size_t i, const Cube& s) {
  if (i == 0) return intersects_init(s);
  auto a = frame_assumptions(i);
  for (auto l : unprimed(enc_, s)) a.push_back(l);
  return solve(main_, a).sat();
}

bool Engine::has_predecessor(std::size_t i, const Cube& s, sat::SolveOutcome* model, Cube* core) {
  auto a = frame_assumptions(i);
  auto primed = prime(enc_, s);
  a.insert(a.end(), primed.begin(), primed.end());
  auto r = solve(main_, a);
  if (r.sat()) {
    if (model) *model = std::move(r);
    return true;
  }
  if (core) {
    std::vector<StateLit> keep;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (std::find(r.failed_assumptions.begin(), r.failed_assumptions.end(), primed[j]) != r.failed_assumptions.end())
        keep.push_back(s[j]);
    *core = Cube(std::move(keep));
  }
  return false;
}

bool Engine::relatively_inductive(const Clause& c, std::size_t i, Cube* core) {
  if (i == 0) throw std::invalid_argument("relative inductiveness needs a frame index >= 1");
  auto act = fresh_activation();
  std::vector<sat::Lit> guarded{~act};
  for (auto l : c) guarded.push_back(enc_.cur_lit(l));
  main_.add_clause(guarded);
  auto a = frame_assumptions(i - 1);
  a.push_back(act);
  auto cube = negate(c);
  auto primed = prime(enc_, cube);
  a.insert(a.end(), primed.begin(), primed.end());
  sat::SolveOutcome r;
  try {
    r = solve(main_, a);
  } catch (...) {
    retire(act);
    throw;
  }
  retire(act);
  if (r.sat()) return false;
  if (core) {
    std::vector<StateLit> keep;
    for (std::size_t j = 0; j < cube.size(); ++j)
      if (std::find(r.failed_assumptions.begin(), r.failed_assumptions.end(), primed[j]) != r.failed_assumptions.end())
        keep.push_back(cube[j]);
    *core = Cube(std::move(keep));
  }
  return true;
}

void Engine::verify_lemma(const Clause& c, std::size_t i) {
  if (!initiation(c)) throw std::logic_error("lemma " + c.str() + " violates initiation");
  if (!relatively_inductive(c, i))
    throw std::logic_error("lemma " + c.str() + " is not inductive relative to frame " + std::to_string(i - 1));
}

bool Engine::block_one(const Cube& s, std::size_t k) {
  nodes_.push_back({s, std::nullopt, {}, {}, false});
  queue_.clear();
  queue_.push({s, k, 0, 0, 0, nodes_.size() - 1});
  return block_proof_obligations();
}

bool Engine::block_proof_obligations() {
  while (!queue_.empty()) {
    auto ob = select_obligation(queue_);
    ++stats_.obligations;
    if (ob.frame > 0 && !frame_intersects(ob.frame, ob.cube)) {
      ++stats_.stale_obligations;
      continue;
    }
    // Obligations are cubes rather than concrete states, so reaching I
    // happens as soon as the cube meets I, not only at frame 0.
    if (intersects_init(ob.cube)) {
      failed_node_ = ob.node;
      queue_.clear();
      return false;
    }
    if (ob.frame == 0) {
      ++stats_.stale_obligations;
      continue;
    }
    sat::SolveOutcome model;
    Cube core;
    if (has_predecessor(ob.frame - 1, ob.cube, &model, &core)) {
      auto p = pred_gen(model, ob.frame - 1, ob.cube);
      ++stats_.predecessors;
      nodes_.push_back({p, ob.node, inputs_of(enc_, model), {}, false});
      auto again = ob;
      ++again.age;
      queue_.push(std::move(again));
      queue_.push({p, ob.frame - 1, ob.depth + 1, 0, 0, nodes_.size() - 1});
    } else {
      auto c = ind_gen_from(ob.cube, ob.frame, core);
      add_lemma(c, ob.frame);
    }
  }
  return true;
}

std::vector<Cube> Engine::counterexample_chain() const {
  std::vector<Cube> chain;
  if (!failed_node_) return chain;
  for (std::optional<std::size_t> n = failed_node_; n; n = nodes_[*n].successor) chain.push_back(nodes_[*n].cube);
  return chain;
}

certify::Witness Engine::build_witness(std::size_t failing) {
  certify::Witness w;
  w.property_index = ts_.property_index();
  const auto& c = ts_.circuit();
  w.initial_state.assign(c.latches.size(), false);
  for (std::size_t i = 0; i < c.latches.size(); ++i)
    if (!c.latches[i].uninitialized()) w.initial_state[i] = c.latches[i].reset == 1;
  for (auto l : nodes_[failing].cube) w.initial_state[l.latch()] = !l.negated();
  for (std::optional<std::size_t> n = failing; n; n = nodes_[*n].successor) {
    w.input_frames.push_back(nodes_[*n].inputs);
    if (nodes_[*n].is_cti) w.input_frames.push_back(nodes_[*n].bad_inputs);
  }
  return w;
}

Verdict Engine::check() {
  Verdict v;
  auto finish = [&](Result r) {
    v.result = r;
    stats_.frames = top();
    stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    v.stats = stats_;
    return v;
  };
  try {
    // 0-step: I and bad.
    {
      std::vector<sat::Lit> a;
      for (auto l : ts_.init()) a.push_back(enc_.cur_lit(l));
      a.push_back(enc_.bad_cur);
      auto r = solve(main_, a);
      if (r.sat()) {
        v.witness = certify::Witness{ts_.property_index(), {}, {inputs_of(enc_, r)}};
        for (auto l : state_of(enc_, r)) v.witness->initial_state.push_back(!l.negated());
        return finish(Result::Unsafe);
      }
    }
    // 1-step: I and T and bad'.
    {
      std::vector<sat::Lit> a;
      for (auto l : ts_.init()) a.push_back(enc_.cur_lit(l));
      a.push_back(enc_.bad_nxt);
      auto r = solve(main_, a);
      if (r.sat()) {
        v.witness = certify::Witness{ts_.property_index(), {}, {inputs_of(enc_, r), inputs_of(enc_, r, true)}};
        for (auto l : state_of(enc_, r)) v.witness->initial_state.push_back(!l.negated());
        return finish(Result::Unsafe);
      }
    }
    while (true) {
      const auto k = top();
      while (true) {
        auto a = frame_assumptions(k);
        a.push_back(enc_.bad_nxt);
        auto r = solve(main_, a);
        if (!r.sat()) break;
        ++stats_.ctis;
        auto full = state_of(enc_, r);
        auto in = inputs_of(enc_, r);
        auto bad_in = inputs_of(enc_, r, true);
        auto s = opts_.policies.pred_gen.variant == "none" ? full : keep_initiation(lift(full, in, &bad_in, nullptr), full);
        nodes_.push_back({s, std::nullopt, in, bad_in, true});
        queue_.clear();
        queue_.push({s, k, 0, 0, 0, nodes_.size() - 1});
        if (!block_proof_obligations()) {
          v.witness = build_witness(*failed_node_);
          return finish(Result::Unsafe);
        }
      }
      extend();
      push_clauses(top());
      if (auto i = fixpoint()) {
        v.certificate = certificate(*i);
        if (opts_.verify_lemmas) {
          auto res = certify::check_certificate(ts_, *v.certificate);
          if (!res.ok) throw std::logic_error("internal certificate fails " + res.obligation + ": " + res.reason);
        }
        return finish(Result::Safe);
      }
    }
  } catch (const TimeoutSignal&) {
    v.certificate.reset();
    v.witness.reset();
    return finish(Result::Timeout);
  }
}

Verdict check(const TransitionSystem& ts, const CheckOptions& opts) {
  Engine e(ts, opts);
  return e.check();
}

}  // namespace slotic3::ic3
