#include <doctest.h>

#include <memory>
#include <random>

#include "../support/corrupt.hpp"
#include "../support/oracle.hpp"
#include "slotic3/certify.hpp"
#include "slotic3/corpus.hpp"
#include "slotic3/ic3.hpp"

using namespace slotic3;
using certify::Certificate;
using certify::Witness;
using support::corrupt;
using support::signed_clauses;

namespace {

TransitionSystem system_of(const aiger::AigerCircuit& c) {
  return TransitionSystem(std::make_shared<const aiger::AigerCircuit>(c));
}

struct Solved {
  corpus::Instance inst;
  ic3::Verdict verdict;
};

const std::vector<Solved>& solved_corpus() {
  static const std::vector<Solved> all = [] {
    std::vector<Solved> v;
    for (auto& inst : corpus::small_corpus(7, 60, 10)) {
      auto r = ic3::check(system_of(inst.circuit));
      v.push_back({std::move(inst), std::move(r)});
    }
    return v;
  }();
  return all;
}

}  // namespace

TEST_CASE("certificate text round-trips and tolerates cosmetic changes") {
  Certificate c;
  c.clauses.push_back(Clause({StateLit(0, false), StateLit(2, true)}));
  c.clauses.push_back(Clause({StateLit(1, true)}));
  c.normalize();
  auto text = certify::write_certificate(c);
  CHECK(certify::parse_certificate(text) == c);
  CHECK(certify::parse_certificate("IC3CERT 1\r\nclauses 2\r\n  -3   1 0\r\n-2 0\r\n\n\n") == c);
  CHECK(certify::parse_certificate("IC3CERT 1\nclauses 3\n-2 0\n1 -3 0\n-2 0\n") == c);

  CHECK_THROWS_AS(certify::parse_certificate("IC3CERT 2\nclauses 0\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_certificate("IC3CERT 1\nclauses 2\n1 0\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_certificate("IC3CERT 1\nclauses 1\n1 -1 0\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_certificate("IC3CERT 1\nclauses 1\n1 2\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_certificate("IC3CERT 1\nclauses 1\n1 x 0\n"), certify::FormatError);
}

TEST_CASE("witness text round-trips") {
  Witness w{0, {true, false}, {{true}, {false}, {true}}};
  auto text = certify::write_witness(w);
  CHECK(text == "1\nb0\n10\n1\n0\n1\n.\n");
  CHECK(certify::parse_witness(text) == w);
  CHECK(certify::parse_witness("1\nb0\n1 0\n1\n0\n1\n.\n") == w);
  CHECK_THROWS_AS(certify::parse_witness("1\nb0\n10\n1\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_witness("0\nb0\n10\n1\n.\n"), certify::FormatError);
  CHECK_THROWS_AS(certify::parse_witness("1\nb0\n12\n1\n.\n"), certify::FormatError);
}

TEST_CASE("checker verdicts on engine artifacts agree with the explicit-state oracle") {
  std::size_t safe = 0, unsafe = 0;
  for (const auto& [inst, v] : solved_corpus()) {
    CAPTURE(inst.name);
    auto ts = system_of(inst.circuit);
    REQUIRE(v.result != ic3::Result::Timeout);
    if (v.result == ic3::Result::Safe) {
      ++safe;
      REQUIRE(v.certificate);
      CHECK(certify::check_certificate(ts, *v.certificate).ok);
      CHECK(oracle::certificate_valid(inst.circuit, 0, signed_clauses(*v.certificate)));
      // Text round trip keeps the certificate valid.
      auto again = certify::parse_certificate(certify::write_certificate(*v.certificate));
      CHECK(certify::check_certificate(ts, again).ok);
    } else {
      ++unsafe;
      REQUIRE(v.witness);
      CHECK(certify::replay_witness(ts, *v.witness).ok);
      CHECK(oracle::witness_valid(inst.circuit, 0, v.witness->initial_state, v.witness->input_frames));
      auto again = certify::parse_witness(certify::write_witness(*v.witness));
      CHECK(certify::replay_witness(ts, again).ok);
    }
  }
  CHECK(safe >= 10);
  CHECK(unsafe >= 10);
}

TEST_CASE("at least 100 corrupted certificates are all rejected") {
  std::mt19937_64 rng(2024);
  std::size_t invalid = 0, valid = 0;
  for (int round = 0; invalid < 100 && round < 40; ++round)
    for (const auto& [inst, v] : solved_corpus()) {
      if (v.result != ic3::Result::Safe || inst.circuit.latches.empty()) continue;
      auto ts = system_of(inst.circuit);
      auto bad = corrupt(*v.certificate, inst.circuit.latches.size(), rng);
      bool truth = oracle::certificate_valid(inst.circuit, 0, signed_clauses(bad));
      auto r = certify::check_certificate(ts, bad);
      CAPTURE(inst.name);
      CAPTURE(certify::write_certificate(bad));
      CHECK(r.ok == truth);
      if (truth) {
        ++valid;
      } else {
        ++invalid;
        CHECK(!r.obligation.empty());
      }
    }
  CHECK(invalid >= 100);
  MESSAGE("corrupted certificates: " << invalid << " invalid, " << valid << " still inductive");
}

TEST_CASE("at least 100 corrupted witnesses are all rejected") {
  std::mt19937_64 rng(77);
  std::size_t invalid = 0;
  for (int round = 0; invalid < 100 && round < 40; ++round)
    for (const auto& [inst, v] : solved_corpus()) {
      if (v.result != ic3::Result::Unsafe) continue;
      auto ts = system_of(inst.circuit);
      auto bad = corrupt(*v.witness, rng);
      bool truth = oracle::witness_valid(inst.circuit, 0, bad.initial_state, bad.input_frames);
      CAPTURE(inst.name);
      CHECK(certify::replay_witness(ts, bad).ok == truth);
      if (!truth) ++invalid;
    }
  CHECK(invalid >= 100);
}

TEST_CASE("failed obligations carry a counterexample state") {
  // Counting to 4 then wrapping never reaches 6, but 5 does step to 6, so
  // the bare property is not inductive.
  auto wrap = system_of(corpus::counter(3, 5, 6).circuit);
  Certificate none;
  auto r = certify::check_certificate(wrap, none);
  CHECK_FALSE(r.ok);
  CHECK(r.obligation == "consecution");
  REQUIRE(r.state);

  CHECK(r.state == aiger::Bits{true, false, true});

  auto ts = system_of(corpus::counter(2, 4, 3).circuit);
  Certificate excludes_init;
  excludes_init.clauses.push_back(Clause({StateLit(0, false)}));
  r = certify::check_certificate(ts, excludes_init);
  CHECK_FALSE(r.ok);
  CHECK(r.obligation == "initiation");

  Certificate unknown_latch;
  unknown_latch.clauses.push_back(Clause({StateLit(9, false)}));
  CHECK(certify::check_certificate(ts, unknown_latch).obligation == "format");
}

TEST_CASE("witness replay reports the failing obligation") {
  auto ts = system_of(corpus::counter(2, 4, 3).circuit);
  CHECK(certify::replay_witness(ts, {0, {false, false}, {{true}, {true}, {true}, {false}}}).ok);
  CHECK(certify::replay_witness(ts, {0, {false, false}, {{true}, {true}}}).obligation == "bad");
  CHECK(certify::replay_witness(ts, {0, {true, false}, {{true}, {true}, {true}}}).obligation == "initial");
  CHECK(certify::replay_witness(ts, {0, {false}, {{true}}}).obligation == "width");
  CHECK(certify::replay_witness(ts, {0, {false, false}, {{true, true}}}).obligation == "width");
  CHECK(certify::replay_witness(ts, {1, {false, false}, {{true}}}).obligation == "width");
}
