#include <doctest.h>

#include <random>

#include "../support/oracle.hpp"
#include "slotic3/aiger.hpp"
#include "slotic3/corpus.hpp"

using namespace slotic3;
using aiger::ParseError;

TEST_CASE("degenerate and single-input circuits parse") {
  auto c = aiger::parse("aag 0 0 0 1 0\n0\n");
  CHECK(c.max_var == 0);
  CHECK(c.outputs == std::vector<aiger::Lit>{0});
  CHECK(c.properties() == std::vector<aiger::Lit>{0});

  auto d = aiger::parse("aag 1 1 0 1 0\n2\n2\n");
  CHECK(d.inputs == std::vector<aiger::Lit>{2});
  CHECK(d.outputs == std::vector<aiger::Lit>{2});
}

TEST_CASE("latch reset defaults to 0 and accepts 1 or self") {
  auto c = aiger::parse("aag 3 0 3 1 0\n2 3\n4 4 1\n6 6 6\n2\n");
  REQUIRE(c.latches.size() == 3);
  CHECK(c.latches[0].reset == 0);
  CHECK(c.latches[1].reset == 1);
  CHECK(c.latches[2].uninitialized());
  auto bits = aiger::reset_state(c, true);
  CHECK(bits == aiger::Bits{false, true, true});
}

TEST_CASE("bad-state section takes precedence over outputs") {
  auto c = aiger::parse("aag 2 1 1 1 0 1\n2\n4 2\n4\n5\n");
  CHECK(c.bads == std::vector<aiger::Lit>{5});
  CHECK(c.properties() == std::vector<aiger::Lit>{5});
}

TEST_CASE("malformed inputs report a position") {
  auto line_of = [](const char* text) -> std::size_t {
    try {
      aiger::parse(text);
    } catch (const ParseError& e) {
      return e.is_line() ? e.position() : 1000000 + e.position();
    }
    return 0;
  };
  CHECK(line_of("aag 1 0 0 1\n2\n") == 1);                  // short header
  CHECK(line_of("xyz 0 0 0 0 0\n") == 1);                  // bad magic
  CHECK(line_of("aag 1 1 0 1 0\n2\n4\n") == 3);            // out of range
  CHECK(line_of("aag 3 1 0 1 2\n2\n4\n4 2 2\n4 3 3\n") == 5);  // duplicate AND
  CHECK(line_of("aag 3 1 0 1 1\n2\n6\n6 4 2\n") == 4);     // undefined var in AND
  CHECK(line_of("aag 3 0 0 1 2\n2\n2 4 1\n4 2 1\n") == 3); // cycle
  CHECK(line_of("aag 1 0 0 0 0 0 1\n") == 1);              // C section
  CHECK(line_of("aag 1 0 0 0 0 0 0 1\n") == 1);            // J section
  CHECK(line_of("aag 2 1 0 1 1\n2\n4\n4 2\n") == 4);       // AND with two literals
  // Binary: header promises one AND, stream is empty.
  CHECK(line_of("aig 2 1 0 1 1\n4\n") == 1000000 + 16);
  CHECK(line_of("aig 2 1 0 1 1\n4\n\x80") == 1000000 + 17);
  CHECK(line_of("aig 2 1 0 1 0\n4\n") == 1);  // M != I + L + A
}

TEST_CASE("simulate_step basics") {
  auto empty = aiger::parse("aag 0 0 0 1 0\n1\n");
  auto r = aiger::simulate_step(empty, {}, {});
  CHECK(r.next_state.empty());
  CHECK(r.bad);

  auto toggle = aiger::parse("aag 1 0 1 1 0\n2 3\n2\n");
  CHECK(aiger::simulate_step(toggle, {false}, {}).next_state == aiger::Bits{true});
  CHECK_THROWS_AS(aiger::simulate_step(toggle, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(aiger::simulate_step(toggle, {false}, {true}), std::invalid_argument);
}

TEST_CASE("3-bit counter raises bad after exactly 5 enabled steps") {
  auto inst = corpus::counter(3, 8, 5);
  aiger::Bits s(3, false);
  int first = -1;
  for (int t = 0; t < 8 && first < 0; ++t) {
    auto r = aiger::simulate_step(inst.circuit, s, {true});
    if (r.bad) first = t;
    s = r.next_state;
  }
  CHECK(first == 5);
}

TEST_CASE("binary and ASCII encodings of the same counter are identical netlists") {
  auto inst = corpus::counter(3, 6, 5);
  auto ascii = aiger::to_ascii(aiger::normalize(inst.circuit));
  auto binary = aiger::to_binary(inst.circuit);
  CHECK(binary.rfind("aig ", 0) == 0);
  auto from_ascii = aiger::parse(ascii);
  auto from_binary = aiger::parse(binary);
  CHECK(from_ascii == from_binary);
  CHECK(aiger::normalize(from_ascii) == from_ascii);

  // Small sequential netlist written by hand in both formats: input var 1,
  // latch vars 2-3, AND vars 4-7.
  const std::string aag =
      "aag 7 1 2 0 4 1\n2\n4 9\n6 14\n15\n8 5 3\n10 6 4\n12 7 5\n14 13 11\n";
  std::string aig = "aig 7 1 2 0 4 1\n9\n14\n15\n";
  for (unsigned char b : {8 - 5, 5 - 3, 10 - 6, 6 - 4, 12 - 7, 7 - 5, 14 - 13, 13 - 11}) aig.push_back(static_cast<char>(b));
  auto pa = aiger::parse(aag), pb = aiger::parse(aig);
  CHECK(pa == pb);
}

TEST_CASE("parse . serialize . parse is a fixpoint and simulation agrees on random vectors") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto c = corpus::random_aig(seed, 1 + seed % 10, seed % 4, 20 + seed).circuit;
    auto a1 = aiger::parse(aiger::to_ascii(c));
    auto a2 = aiger::parse(aiger::to_ascii(a1));
    CHECK(a1 == a2);
    auto b1 = aiger::parse(aiger::to_binary(c));
    CHECK(aiger::parse(aiger::to_binary(b1)) == b1);
    for (int k = 0; k < 1000 / 30 + 1; ++k) {
      std::uint64_t st = rng(), in = rng();
      aiger::Bits s, i;
      for (std::size_t j = 0; j < c.latches.size(); ++j) s.push_back((st >> j) & 1);
      for (std::size_t j = 0; j < c.inputs.size(); ++j) i.push_back((in >> j) & 1);
      auto r0 = aiger::simulate_step(c, s, i);
      auto rb = aiger::simulate_step(b1, s, i);
      auto ra = aiger::simulate_step(a1, s, i);
      CHECK(r0.next_state == rb.next_state);
      CHECK(r0.bad == rb.bad);
      CHECK(r0.next_state == ra.next_state);
      CHECK(r0.bad == ra.bad);
      auto [next, bad] = oracle::step(c, 0, st & ((1ull << c.latches.size()) - 1), in & ((1ull << c.inputs.size()) - 1));
      std::uint64_t packed = 0;
      for (std::size_t j = 0; j < r0.next_state.size(); ++j) packed |= std::uint64_t{r0.next_state[j]} << j;
      CHECK(packed == next);
      CHECK(r0.bad == bad);
    }
  }
}

TEST_CASE("ANDs given out of order are sorted topologically") {
  auto c = aiger::parse("aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 4 2\n");
  REQUIRE(c.ands.size() == 2);
  CHECK(c.ands[0].lhs == 6);
  CHECK(c.ands[1].lhs == 8);
  CHECK(aiger::simulate_step(c, {}, {true, true}).bad);
  CHECK_FALSE(aiger::simulate_step(c, {}, {true, false}).bad);
}
