#include <doctest.h>

#include <memory>

#include "../support/oracle.hpp"
#include "slotic3/certify.hpp"
#include "slotic3/corpus.hpp"
#include "slotic3/ic3.hpp"

using namespace slotic3;

namespace {

TransitionSystem system_of(const aiger::AigerCircuit& c) {
  return TransitionSystem(std::make_shared<const aiger::AigerCircuit>(c));
}

ic3::CheckOptions verified(PolicySet p = {}) {
  ic3::CheckOptions o;
  o.policies = std::move(p);
  o.verify_lemmas = true;
  return o;
}

void expect_matches_oracle(const corpus::Instance& inst, const ic3::CheckOptions& opts) {
  CAPTURE(inst.name);
  auto ts = system_of(inst.circuit);
  auto v = ic3::check(ts, opts);
  auto ref = oracle::bfs(inst.circuit);
  REQUIRE(v.result != ic3::Result::Timeout);
  CHECK((v.result == ic3::Result::Unsafe) == ref.unsafe);
  if (v.result == ic3::Result::Safe) {
    REQUIRE(v.certificate);
    auto r = certify::check_certificate(ts, *v.certificate);
    CHECK_MESSAGE(r.ok, r.obligation << ": " << r.reason);
  } else {
    REQUIRE(v.witness);
    auto r = certify::replay_witness(ts, *v.witness);
    CHECK_MESSAGE(r.ok, r.obligation << ": " << r.reason);
    // IC3 witnesses need not be shortest but can never beat BFS.
    CHECK(v.witness->input_frames.size() >= ref.depth + 1);
  }
}

}  // namespace

TEST_CASE("constant-false bad is safe with an empty certificate") {
  corpus::CircuitBuilder b;
  auto x = b.latch(0);
  b.set_next(x, aiger::negate(x));
  b.bad(aiger::kFalse);
  auto ts = system_of(b.build());
  auto v = ic3::check(ts, verified());
  CHECK(v.result == ic3::Result::Safe);
  REQUIRE(v.certificate);
  CHECK(v.certificate->clauses.empty());
}

TEST_CASE("bad latch with reset 1 is unsafe in zero steps") {
  corpus::CircuitBuilder b;
  auto x = b.latch(1);
  b.set_next(x, x);
  b.bad(x);
  auto ts = system_of(b.build());
  auto v = ic3::check(ts, verified());
  REQUIRE(v.result == ic3::Result::Unsafe);
  REQUIRE(v.witness);
  CHECK(v.witness->input_frames.size() == 1);
  CHECK(certify::replay_witness(ts, *v.witness).ok);
}

TEST_CASE("4-bit counter reaching 10 yields a witness of at least 10 steps") {
  auto inst = corpus::counter(4, 16, 10);
  auto ts = system_of(inst.circuit);
  auto v = ic3::check(ts, verified());
  REQUIRE(v.result == ic3::Result::Unsafe);
  CHECK(v.witness->input_frames.size() >= 11);
  CHECK(certify::replay_witness(ts, *v.witness).ok);
}

TEST_CASE("random AIG corpus agrees with explicit-state reachability") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    expect_matches_oracle(corpus::random_aig(seed, 1 + seed % 12, seed % 4, 10 + 2 * seed), verified());
}

TEST_CASE("mixed corpus agrees with the oracle under every policy variant") {
  auto insts = corpus::small_corpus(7, 24);
  for (auto slot : all_slots())
    for (const auto& spec : variants(slot)) {
      PolicySet p;
      p.set(make_policy(slot, spec.name));
      CAPTURE(p.str());
      for (const auto& inst : insts) expect_matches_oracle(inst, verified(p));
    }
}

TEST_CASE("block_one on an already excluded cube adds no lemma") {
  auto inst = corpus::shift(2, true);
  auto ts = system_of(inst.circuit);
  ic3::Engine e(ts, verified());
  // Block (r1[0] & !r2[0]) once, then ask again.
  Cube s({StateLit(0, false), StateLit(2, true)});
  REQUIRE(e.block_one(s, 1));
  auto lemmas = e.stats().lemmas;
  CHECK_FALSE(e.frame_intersects(1, s));
  REQUIRE(e.block_one(s, 1));
  CHECK(e.stats().lemmas == lemmas);
  CHECK(e.queue().empty());
}

TEST_CASE("block_one fails for a cube two steps from reset") {
  // Shift register of 2 stages: state 11 is reachable in two steps.
  auto inst = corpus::shift(2, false);
  auto ts = system_of(inst.circuit);
  ic3::Engine e(ts, verified());
  e.extend();
  Cube s({StateLit(0, false), StateLit(1, false)});
  CHECK_FALSE(e.block_one(s, 2));
  auto chain = e.counterexample_chain();
  REQUIRE(chain.size() >= 2);
  CHECK(chain.back() == s);
}

TEST_CASE("block_one with an unsatisfiable pre-image adds exactly one lemma inside not-s") {
  // x' = 0 always, so x=1 has no predecessor at all.
  corpus::CircuitBuilder b;
  auto x = b.latch(0);
  auto y = b.latch(0);
  b.set_next(x, aiger::kFalse);
  b.set_next(y, aiger::negate(y));
  b.bad(x);
  auto ts = system_of(b.build());
  ic3::Engine e(ts, verified());
  Cube s({StateLit(0, false), StateLit(1, false)});
  REQUIRE(e.block_one(s, 1));
  CHECK(e.stats().lemmas == 1);
  auto lemma = e.level(1).at(0);
  CHECK(lemma.subset_of(negate(s)));
  CHECK_FALSE(e.frame_intersects(1, s));
}

TEST_CASE("ind_gen drops a latch that never affects the transition") {
  // a' = 0, b free-running toggle, c irrelevant: blocking a&b&c must keep
  // only the a literal.
  corpus::CircuitBuilder b;
  auto a = b.latch(0);
  auto t = b.latch(0);
  auto c = b.latch(0);
  b.set_next(a, aiger::kFalse);
  b.set_next(t, aiger::negate(t));
  b.set_next(c, c);
  b.bad(a);
  auto ts = system_of(b.build());
  ic3::Engine e(ts, verified());
  Cube s({StateLit(0, false), StateLit(1, false), StateLit(2, false)});
  auto cl = e.ind_gen(s, 1);
  CHECK(cl.size() < s.size());
  CHECK(cl.subset_of(negate(s)));
  CHECK(e.initiation(cl));
  CHECK(e.relatively_inductive(cl, 1));
}

TEST_CASE("ind_gen keeps not-s when every drop breaks initiation") {
  corpus::CircuitBuilder b;
  auto x = b.latch(0);
  b.set_next(x, aiger::kFalse);
  b.bad(x);
  auto ts = system_of(b.build());
  ic3::Engine e(ts, verified());
  Cube s({StateLit(0, false)});
  CHECK(e.ind_gen(s, 1) == negate(s));
}

TEST_CASE("pred_gen returns a cube whose every state steps into s") {
  // Two latches; next(a) = in, next(b) = b. Target a=1: b irrelevant.
  corpus::CircuitBuilder b;
  auto in = b.input();
  auto a = b.latch(0);
  auto bb = b.latch(0);
  b.set_next(a, b.and_(in, bb));
  b.set_next(bb, bb);
  b.bad(aiger::kFalse);
  auto circuit = b.build();
  auto ts = system_of(circuit);
  for (double reverse : {0.0, 1.0}) {
    PolicySet p;
    p.pred_gen = make_policy(SlotId::PredGen, "lift", {{"reverse", reverse}});
    ic3::Engine e(ts, verified(p));
    Cube target({StateLit(0, false)});
    sat::SolveOutcome model;
    REQUIRE(e.has_predecessor(1, target, &model));
    auto cube = e.pred_gen(model, 1, target);
    // Brute force: every state in `cube` with the model's input reaches a=1.
    for (std::uint64_t st = 0; st < 4; ++st) {
      bool in_cube = true;
      for (auto l : cube) in_cube = in_cube && (((st >> l.latch()) & 1) == !l.negated());
      if (!in_cube) continue;
      bool ok = false;
      for (std::uint64_t iv = 0; iv < 2; ++iv) ok = ok || (oracle::step(circuit, 0, st, iv).first & 1);
      CHECK(ok);
    }
    CHECK(cube.size() <= 2);
  }
}

TEST_CASE("stall_skip gives zero push queries to a frame at the stall limit") {
  PolicySet p;
  p.push_prop = make_policy(SlotId::PushProp, "stall_skip", {{"limit", 1}});
  auto inst = corpus::counter(6, 40, 50);
  auto ts = system_of(inst.circuit);
  ic3::Engine e(ts, verified(p));
  auto v = e.check();
  CHECK(v.result == ic3::Result::Safe);
  CHECK(v.stats.push_frames_skipped > 0);
}

TEST_CASE("select_obligation orders by frame, then size, then insertion") {
  ic3::ObligationQueue q(make_policy(SlotId::PoHandling, "min_frame_then_size"));
  Cube big({StateLit(0, false), StateLit(1, false)}), small({StateLit(2, true)});
  q.push({big, 2, 0, 0, 0, 0});
  q.push({big, 1, 5, 0, 0, 1});
  q.push({small, 1, 9, 0, 0, 2});
  q.push({small, 1, 0, 0, 0, 3});
  CHECK(q.pop().node == 2);
  CHECK(q.pop().node == 3);
  CHECK(q.pop().node == 1);
  CHECK(q.pop().node == 0);

  ic3::ObligationQueue d(make_policy(SlotId::PoHandling, "dfs"));
  d.push({big, 0, 0, 0, 0, 7});
  CHECK(d.pop().node == 7);
  d.push({big, 0, 0, 0, 0, 1});
  d.push({big, 9, 0, 0, 0, 2});
  CHECK(d.pop().node == 2);
}

TEST_CASE("timeout returns TIMEOUT without artifacts") {
  ic3::CheckOptions o;
  o.timeout_sec = 0.0;
  auto inst = corpus::counter(8, 200, 250);
  auto v = ic3::check(system_of(inst.circuit), o);
  CHECK(v.result == ic3::Result::Timeout);
  CHECK_FALSE(v.certificate);
  CHECK_FALSE(v.witness);
}

TEST_CASE("stall_skip skips exactly the frame whose streak reached the limit") {
  PolicySet p;
  p.push_prop = make_policy(SlotId::PushProp, "stall_skip", {{"limit", 1}});
  auto inst = corpus::shift(2, false);
  auto ts = system_of(inst.circuit);
  ic3::Engine e(ts, verified(p));
  // "r1 is 0" holds within one step of reset but cannot be pushed further.
  e.add_lemma(Clause({StateLit(1, true)}), 1);
  e.extend();
  e.extend();
  e.push_clauses(e.top());
  CHECK(e.heuristic_state().last_round_queries.at(1) == 1);
  CHECK(e.heuristic_state().stall_streak.at(1) == 1);
  e.push_clauses(e.top());
  CHECK(e.heuristic_state().last_round_queries.at(1) == 0);
  CHECK(e.stats().push_frames_skipped == 1);
  e.push_clauses(e.top());
  CHECK(e.heuristic_state().last_round_queries.at(1) == 1);
}
