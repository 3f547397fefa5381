#include <doctest.h>

#include <memory>

#include "../support/oracle.hpp"
#include "slotic3/corpus.hpp"
#include "slotic3/encode.hpp"

using namespace slotic3;

namespace {

void check_exhaustively(const aiger::AigerCircuit& c) {
  TransitionSystem ts(std::make_shared<const aiger::AigerCircuit>(c));
  sat::Solver s;
  auto e = build_encoding(ts, s);
  const auto L = c.latches.size(), I = c.inputs.size();
  REQUIRE(e.cur.size() == L);
  REQUIRE(e.nxt.size() == L);
  REQUIRE(e.inp.size() == I);
  for (std::uint64_t st = 0; st < (std::uint64_t{1} << L); ++st)
    for (std::uint64_t in = 0; in < (std::uint64_t{1} << I); ++in) {
      std::vector<sat::Lit> a;
      for (std::size_t i = 0; i < L; ++i) a.push_back((st >> i) & 1 ? e.cur[i] : ~e.cur[i]);
      for (std::size_t i = 0; i < I; ++i) a.push_back((in >> i) & 1 ? e.inp[i] : ~e.inp[i]);
      // Pin the primed inputs too so bad' is determined.
      for (std::size_t i = 0; i < I; ++i) a.push_back((in >> i) & 1 ? e.inp_nxt[i] : ~e.inp_nxt[i]);
      auto r = s.solve(a);
      REQUIRE(r.sat());
      auto [next, bad] = oracle::step(c, 0, st, in);
      std::uint64_t got = 0;
      for (std::size_t i = 0; i < L; ++i)
        if (r.value(e.nxt[i])) got |= std::uint64_t{1} << i;
      CHECK(got == next);
      CHECK(r.value(e.bad_cur) == bad);
      CHECK(r.value(e.bad_nxt) == oracle::step(c, 0, next, in).second);
      CHECK(r.value(e.const_true));
    }
}

}  // namespace

TEST_CASE("transition encoding agrees with the simulator on every state and input") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto inst = corpus::random_aig(seed, 1 + seed % 8, seed % 4, 10 + 2 * seed);
    CAPTURE(inst.name);
    check_exhaustively(inst.circuit);
  }
  check_exhaustively(corpus::counter(4, 11, 9).circuit);
  check_exhaustively(corpus::toggle(3, true).circuit);
  check_exhaustively(corpus::equal_counters(3, true).circuit);
}

TEST_CASE("initial cube skips uninitialized latches") {
  auto c = aiger::parse("aag 3 0 3 1 0\n2 3\n4 4 1\n6 6 6\n2\n");
  TransitionSystem ts(std::make_shared<const aiger::AigerCircuit>(c));
  CHECK(ts.init().str() == "-1 2");
  CHECK(ts.bad() == 2);
  CHECK_THROWS(TransitionSystem(std::make_shared<const aiger::AigerCircuit>(c), 1));
}

TEST_CASE("activation literals are stable per frame") {
  auto c = corpus::counter(3, 8, 5).circuit;
  TransitionSystem ts(std::make_shared<const aiger::AigerCircuit>(c));
  sat::Solver s;
  auto e = build_encoding(ts, s);
  auto a2 = e.activation(2, s);
  CHECK(e.activation(2, s) == a2);
  CHECK(e.activation(0, s) != a2);
}

TEST_CASE("prime and unprimed map cubes onto the right copy") {
  auto c = corpus::counter(3, 8, 5).circuit;
  TransitionSystem ts(std::make_shared<const aiger::AigerCircuit>(c));
  sat::Solver s;
  auto e = build_encoding(ts, s);
  Cube cube({StateLit(0, false), StateLit(2, true)});
  auto p = prime(e, cube);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == e.nxt[0]);
  CHECK(p[1] == ~e.nxt[2]);
  auto u = unprimed(e, cube);
  CHECK(u[1] == ~e.cur[2]);
}
