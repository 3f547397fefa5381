#include <doctest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "../support/tmpdir.hpp"
#include "slotic3/agent.hpp"
#include "slotic3/checkout.hpp"
#include "slotic3/evolve.hpp"
#include "slotic3/orchestrator.hpp"
#include "slotic3/patch.hpp"

using namespace slotic3;
using namespace slotic3::evolve;
using nlohmann::json;
namespace fs = std::filesystem;
using support::TempDir;

namespace {

const std::vector<std::string> kSlots{"po_handling", "ind_gen", "pred_gen", "push_prop"};

bench::RunRecord run(const std::string& id, bool solved, double t) {
  bench::RunRecord r;
  r.id = id;
  r.verdict = solved ? "SAFE" : "TIMEOUT";
  r.wall_time = t;
  r.ok = true;
  if (solved) {
    r.exit_code = 0;
    r.gate = bench::Gate{};
  }
  return r;
}

GatedReport gated(std::vector<bench::RunRecord> runs, double timeout = 100) {
  GateOutcome g;
  g.passed = true;
  auto r = admit(bench::aggregate(std::move(runs), timeout), g);
  REQUIRE(r.has_value());
  return *r;
}

json scope_json(const Scope& s, double p) {
  json g = json::array();
  for (const auto& m : s.guidance) g.push_back(to_json(m));
  return {{"allowed", s.allowed}, {"guidance", g}, {"jump", s.jump}, {"p", p}};
}

json diagnosis_doc() {
  return {{"schema", "diagnosis_v1"},
          {"decision", "REVERT"},
          {"reasons",
           {{{"metric", "par2"}, {"value", 1.5}}, {{"metric", "solved"}, {"value", 3}}, {{"metric", "lost"}, {"value", 1}}}},
          {"evidence", "slower on shr"},
          {"moveset", {{{"slot", "ind_gen"}, {"direction", "try core_only"}, {"conf", 1.7}, {"risk", -0.2}, {"cost", 0.3}}}}};
}

const char* kDiff =
    "--- a/src/x.cpp\n"
    "+++ b/src/x.cpp\n"
    "@@ -1,3 +1,3 @@\n"
    " int a = 1;\n"
    "-int b = 2;\n"
    "+int b = 3;\n"
    " int c = 4;\n";

std::string hypothesis_text(const std::string& slot) {
  return json{{"schema", "hypothesis_v1"},
              {"primary_slot", slot},
              {"expected_metrics", {{"par2", "decrease"}}},
              {"fallback", "revert"}}
      .dump();
}

std::string added_lines_diff(const std::string& path, std::size_t n) {
  std::string d = "--- a/" + path + "\n+++ b/" + path + "\n@@ -1,1 +1," + std::to_string(n + 1) + " @@\n x\n";
  for (std::size_t i = 0; i < n; ++i) d += "+// " + std::to_string(i) + "\n";
  return d;
}

}  // namespace

TEST_CASE("score_move is the fixed linear score") {
  CHECK(score_move({"s", "d", 0, 0, 0}) == 0);
  CHECK(score_move({"s", "d", 0.8, 0.2, 0.4}) == doctest::Approx(0.60));
  CHECK(score_move({"s", "d", 1, 1, 1}, {2, 1, 1}) == doctest::Approx(0));
  Move low{"a", "", 0.5, 0.1, 0.2}, high{"b", "", 0.5, 0.9, 0.2};
  auto ranked = rank_by_score({high, low});
  CHECK(ranked.front().slot == "a");
  // Ties keep the input order.
  auto tie = rank_by_score({{"x", "1", 0.5, 0, 0}, {"y", "2", 0.5, 0, 0}});
  CHECK(tie.front().slot == "x");
}

TEST_CASE("compass_jump with no moves samples one slot uniformly") {
  std::map<std::string, int> seen;
  PolicyState st;
  st.rng = PolicyRng(11);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    auto s = compass_jump(kSlots, {}, st);
    REQUIRE(s.allowed.size() == 1);
    CHECK(s.guidance.empty());
    CHECK_FALSE(s.jump);
    ++seen[s.allowed[0]];
  }
  CHECK(st.p_jump == 0.2);
  REQUIRE(seen.size() == kSlots.size());
  for (const auto& [slot, k] : seen) {
    CAPTURE(slot);
    CHECK(k > n / 4 - 150);
    CHECK(k < n / 4 + 150);
  }
  // Moves naming only unknown slots count as an empty MoveSet.
  auto s = compass_jump(kSlots, {{"other", "", 1, 0, 0}}, st);
  CHECK(s.allowed.size() == 1);
  CHECK(s.guidance.empty());
}

TEST_CASE("a forced jump takes the top distinct slots") {
  PolicyState st;
  st.bounds.p_max = 1;
  st.p_jump = 1;
  st.jump_size = 2;
  MoveSet moves{{"ind_gen", "a", 0.9, 0.1, 0.1},
                {"ind_gen", "b", 0.8, 0.1, 0.1},
                {"push_prop", "c", 0.7, 0.1, 0.1},
                {"po_handling", "d", 0.1, 0.5, 0.5}};
  for (int i = 0; i < 50; ++i) {
    auto s = compass_jump(kSlots, moves, st);
    CHECK(s.jump);
    CHECK(s.allowed == std::vector<std::string>{"ind_gen", "push_prop"});
    REQUIRE(s.guidance.size() == 2);
    CHECK(s.guidance[0].direction == "a");
    CHECK(s.guidance[1].direction == "c");
  }
  st.p_jump = st.bounds.p_min;
  st.bounds.p_max = st.bounds.p_min;
  bool compass = false;
  for (int i = 0; i < 50; ++i) {
    auto s = compass_jump(kSlots, moves, st);
    if (!s.jump) {
      compass = true;
      CHECK(s.allowed == std::vector<std::string>{"ind_gen"});
      CHECK(s.guidance.size() == 1);
    }
  }
  CHECK(compass);
}

TEST_CASE("adjust_jump shrinks when steady, grows when stagnant, and clamps") {
  const RoundOutcome P{true, -1}, N{false, 0};
  JumpBounds b;
  CHECK(adjust_jump(0.3, {P, P}, b) == doctest::Approx(0.24));
  CHECK(adjust_jump(0.3, {N, P}, b) == doctest::Approx(0.3));
  CHECK(adjust_jump(0.3, {N, N, N}, b) == doctest::Approx(0.4));
  CHECK(adjust_jump(0.3, {P, N, N}, b) == doctest::Approx(0.3));
  CHECK(adjust_jump(0.055, {P, P, P}, b) == doctest::Approx(0.05));
  CHECK(adjust_jump(0.55, {N, N, N}, b) == doctest::Approx(0.6));
  CHECK(adjust_jump(b.p_min, {P, P}, b) == b.p_min);
  CHECK(adjust_jump(b.p_max, {N, N, N, N}, b) == b.p_max);
  CHECK(adjust_jump(0.2, {}, b) == 0.2);
  // Monotone in the stagnation length.
  double prev = 0;
  std::vector<RoundOutcome> h;
  for (int k = 0; k < 8; ++k) {
    double p = adjust_jump(0.2, h, b);
    CHECK(p >= prev);
    prev = p;
    h.push_back(N);
  }
}

TEST_CASE("compass_jump replays byte-identically from a seed") {
  MoveSet moves{{"ind_gen", "a", 0.6, 0.3, 0.1}, {"push_prop", "b", 0.5, 0.1, 0.2}, {"pred_gen", "c", 0.4, 0.2, 0.1}};
  auto trace = [&] {
    PolicyState st;
    st.rng = PolicyRng(2024);
    json out = json::array();
    for (int i = 0; i < 40; ++i) {
      st.history.push_back({i % 3 == 0, i % 2 ? 0.5 : -0.5});
      auto s = compass_jump(kSlots, i % 5 == 0 ? MoveSet{} : moves, st);
      out.push_back(scope_json(s, st.p_jump));
    }
    return out.dump();
  };
  const auto first = trace();
  for (int i = 0; i < 100; ++i) CHECK(trace() == first);
}

TEST_CASE("PolicyRng state survives save and restore") {
  PolicyRng a(5);
  a.uniform();
  auto saved = a.state();
  PolicyRng b;
  b.restore(saved);
  for (int i = 0; i < 10; ++i) CHECK(a.index(7) == b.index(7));
  CHECK_THROWS(b.restore("garbage"));
}

TEST_CASE("volatile histories prefer low-risk moves") {
  const std::vector<RoundOutcome> calm{{false, -1}, {false, -2}, {false, -1}, {false, -3}};
  const std::vector<RoundOutcome> choppy{{false, -1}, {false, 2}, {false, -1}, {false, 3}};
  CHECK_FALSE(volatile_history(calm));
  CHECK(volatile_history(choppy));
  CHECK_FALSE(volatile_history({{false, 0}, {false, 1}, {false, 0}, {false, -1}}));
  auto ranked = rank_by_score({{"a", "bold", 0.9, 0.9, 0}, {"b", "safe", 0.5, 0.1, 0}, {"c", "mid", 0.4, 0.2, 0}});
  CHECK(select_best(ranked, calm).slot == "a");
  CHECK(select_best(ranked, choppy).slot == "b");
  CHECK_THROWS(select_best({}, calm));
}

TEST_CASE("hypothesis and diagnosis documents are validated") {
  auto h = parse_hypothesis(json::parse(hypothesis_text("ind_gen")), kSlots);
  CHECK(h.primary_slot == "ind_gen");
  CHECK(parse_hypothesis(to_json(h), kSlots).expected_metrics == h.expected_metrics);
  auto bad = json::parse(hypothesis_text("ind_gen"));
  bad.erase("primary_slot");
  CHECK_THROWS_AS(parse_hypothesis(bad, kSlots), SchemaError);
  CHECK_THROWS_AS(parse_hypothesis(json::parse(hypothesis_text("nope")), kSlots), SchemaError);
  bad = json::parse(hypothesis_text("ind_gen"));
  bad["expected_metrics"]["par2"] = "better";
  CHECK_THROWS_AS(parse_hypothesis(bad, kSlots), SchemaError);

  auto d = parse_diagnosis(diagnosis_doc(), kSlots);
  CHECK(d.decision == "REVERT");
  REQUIRE(d.moveset.size() == 1);
  CHECK(d.moveset[0].conf == 1);
  CHECK(d.moveset[0].risk == 0);

  auto j = diagnosis_doc();
  j.erase("decision");
  CHECK_THROWS_AS(parse_diagnosis(j, kSlots), SchemaError);
  j = diagnosis_doc();
  j["decision"] = "MAYBE";
  CHECK_THROWS_AS(parse_diagnosis(j, kSlots), SchemaError);
  j = diagnosis_doc();
  j["reasons"].erase(0);
  CHECK_THROWS_AS(parse_diagnosis(j, kSlots), SchemaError);
  j = diagnosis_doc();
  j["moveset"] = json::array();
  CHECK_THROWS_AS(parse_diagnosis(j, kSlots), SchemaError);
  CHECK(parse_diagnosis(j, kSlots, true).moveset.empty());
  j = diagnosis_doc();
  j["moveset"][0]["slot"] = "aiger";
  CHECK_THROWS_AS(parse_diagnosis(j, kSlots), SchemaError);
}

TEST_CASE("promotion rule") {
  std::vector<bench::RunRecord> base{run("a", true, 100), run("b", true, 200), run("c", true, 300), run("d", false, 0)};
  auto champion = gated(base);
  PromotionRule rule;
  CHECK(promote(champion, gated(base), rule) == Promotion::Revert);

  auto faster = base;
  faster[0].wall_time = 50;
  faster[1].wall_time = 50;
  // 50 + 50 + 300 + 200 against 100 + 200 + 300 + 200: PAR2 -50.
  auto c = gated(faster);
  CHECK(c.report().par2 == doctest::Approx(champion.report().par2 - 50));
  CHECK(promote(champion, c, rule) == Promotion::Promote);

  rule.min_improvement_sec = 60;
  CHECK(promote(champion, c, rule) == Promotion::Revert);
  rule.min_improvement_sec = 0;

  // Faster on what it solves, but solves fewer.
  auto fewer = base;
  fewer[0] = run("a", false, 0);
  fewer[1].wall_time = 1;
  fewer[2].wall_time = 1;
  CHECK(promote(champion, gated(fewer), rule) == Promotion::Revert);

  // Same solved count, two lost against a budget of one, PAR2 -100.
  std::vector<bench::RunRecord> ref{run("a", true, 100), run("b", true, 100), run("c", false, 0), run("d", false, 0),
                                    run("e", true, 400)};
  std::vector<bench::RunRecord> alt{run("a", false, 0), run("b", false, 0), run("c", true, 1), run("d", true, 1),
                                    run("e", true, 98)};
  auto r1 = gated(ref, 500), r2 = gated(alt, 500);
  CHECK(r2.report().par2 == doctest::Approx(r1.report().par2 - 100));
  CHECK(r2.report().solved == r1.report().solved);
  CHECK(promote(r1, r2, rule) == Promotion::Revert);
  rule.regression_budget = 2;
  CHECK(promote(r1, r2, rule) == Promotion::Promote);

  CHECK_THROWS_AS(promote(champion, gated({run("a", true, 1)}), rule), std::invalid_argument);
}

TEST_CASE("only gate-passed reports with clean runs are admitted") {
  GateOutcome failed;
  failed.passed = false;
  CHECK_FALSE(admit(bench::aggregate({run("a", true, 1)}, 10), failed).has_value());
  GateOutcome passed;
  passed.passed = true;
  auto broken = run("a", true, 1);
  broken.ok = false;
  broken.gate = bench::Gate{false, "consecution"};
  CHECK_FALSE(admit(bench::aggregate({broken}, 10), passed).has_value());
  CHECK(admit(bench::aggregate({run("a", true, 1)}, 10), passed).has_value());
}

TEST_CASE("unified diffs parse and apply") {
  auto p = patch::parse(kDiff);
  REQUIRE(p.files.size() == 1);
  CHECK(p.files[0].path() == "src/x.cpp");
  CHECK(p.added_lines() == 1);
  CHECK(patch::apply_to(p.files[0], "int a = 1;\nint b = 2;\nint c = 4;\n") == "int a = 1;\nint b = 3;\nint c = 4;\n");
  // Hunk found a few lines below its stated position.
  CHECK(patch::apply_to(p.files[0], "//\n//\nint a = 1;\nint b = 2;\nint c = 4;\n") ==
        "//\n//\nint a = 1;\nint b = 3;\nint c = 4;\n");
  CHECK_THROWS_AS(patch::apply_to(p.files[0], "int a = 1;\nint b = 7;\nint c = 4;\n"), patch::PatchError);
  CHECK_THROWS_AS(patch::parse("--- a/x\n+++ b/x\n@@ -1,2 +1,2 @@\n a\n"), patch::PatchError);
  CHECK_THROWS_AS(patch::parse("--- a/../etc/passwd\n+++ b/../etc/passwd\n@@ -1 +1 @@\n-a\n+b\n"), patch::PatchError);

  TempDir tmp("patch");
  checkout::write_file(tmp / "src/x.cpp", "int a = 1;\nint b = 2;\nint c = 4;\n");
  checkout::write_file(tmp / "gone.hpp", "bye\n");
  std::string multi = std::string(kDiff) +
                      "--- /dev/null\n+++ b/new.hpp\n@@ -0,0 +1,1 @@\n+hello\n\\ No newline at end of file\n"
                      "--- a/gone.hpp\n+++ /dev/null\n@@ -1 +0,0 @@\n-bye\n";
  auto mp = patch::parse(multi);
  CHECK(mp.touched() == std::vector<std::string>{"src/x.cpp", "new.hpp", "gone.hpp"});
  patch::apply(mp, tmp.path());
  CHECK(checkout::read_file(tmp / "src/x.cpp") == "int a = 1;\nint b = 3;\nint c = 4;\n");
  CHECK(checkout::read_file(tmp / "new.hpp") == "hello");
  CHECK_FALSE(fs::exists(tmp / "gone.hpp"));

  // Nothing is written when any file fails.
  checkout::write_file(tmp / "src/x.cpp", "int a = 1;\nint b = 2;\nint c = 4;\n");
  auto half = patch::parse(std::string(kDiff) + "--- a/missing.cpp\n+++ b/missing.cpp\n@@ -1 +1 @@\n-a\n+b\n");
  CHECK_THROWS_AS(patch::apply(half, tmp.path()), patch::PatchError);
  CHECK(checkout::read_file(tmp / "src/x.cpp") == "int a = 1;\nint b = 2;\nint c = 4;\n");
}

TEST_CASE("admission caps and allowlists") {
  patch::AdmissionRules rules;
  rules.forbidden = {"vendor/"};
  const std::vector<std::string> allowed{"src/ic3/ind_gen.cpp", "vendor/x.hpp", "src/ic3/notes.txt"};
  CHECK(patch::admission_errors(patch::parse(added_lines_diff("src/ic3/ind_gen.cpp", 80)), rules, allowed).empty());
  auto over = patch::admission_errors(patch::parse(added_lines_diff("src/ic3/ind_gen.cpp", 81)), rules, allowed);
  REQUIRE(over.size() == 1);
  CHECK(over[0].find("81") != std::string::npos);
  CHECK_FALSE(patch::admission_errors(patch::parse(added_lines_diff("src/ic3/other.cpp", 1)), rules, allowed).empty());
  CHECK_FALSE(patch::admission_errors(patch::parse(added_lines_diff("vendor/x.hpp", 1)), rules, allowed).empty());
  CHECK_FALSE(patch::admission_errors(patch::parse(added_lines_diff("src/ic3/notes.txt", 1)), rules, allowed).empty());
  std::string four;
  for (const char* f : {"a.cpp", "b.cpp", "c.cpp", "d.cpp"}) four += added_lines_diff(f, 1);
  CHECK_FALSE(patch::admission_errors(patch::parse(four), rules, {"a.cpp", "b.cpp", "c.cpp", "d.cpp"}).empty());
  CHECK_FALSE(patch::admission_errors(patch::Patch{}, rules, allowed).empty());
}

TEST_CASE("tree hashing and mirroring") {
  CHECK(checkout::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir tmp("tree");
  checkout::write_file(tmp / "a/src/x.cpp", "x");
  checkout::write_file(tmp / "a/y.hpp", "y");
  const std::vector<std::string> ex{"build", ".git"};
  const auto h = checkout::tree_hash(tmp / "a", ex);
  checkout::write_file(tmp / "a/build/junk.o", "junk");
  CHECK(checkout::tree_hash(tmp / "a", ex) == h);
  CHECK(checkout::list_files(tmp / "a", ex) == std::vector<std::string>{"src/x.cpp", "y.hpp"});

  checkout::write_file(tmp / "b/stale.cpp", "old");
  checkout::write_file(tmp / "b/build/keep.o", "keep");
  checkout::mirror(tmp / "a", tmp / "b", ex);
  CHECK(checkout::tree_hash(tmp / "b", ex) == h);
  CHECK_FALSE(fs::exists(tmp / "b/stale.cpp"));
  CHECK_FALSE(fs::exists(tmp / "b/build/junk.o"));
  CHECK(fs::exists(tmp / "b/build/keep.o"));

  checkout::write_file(tmp / "b/y.hpp", "z");
  CHECK(checkout::tree_hash(tmp / "b", ex) != h);
  fs::rename(tmp / "b/y.hpp", tmp / "b/w.hpp");
  checkout::write_file(tmp / "b/w.hpp", "y");
  CHECK(checkout::tree_hash(tmp / "b", ex) != h);

  auto r = checkout::run_shell("echo out; echo err >&2; exit 3", tmp.path(), 10);
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("out") != std::string::npos);
  CHECK(r.output.find("err") != std::string::npos);
  auto slow = checkout::run_shell("sleep 5", tmp.path(), 0.2);
  CHECK(slow.timed_out);
  CHECK_FALSE(slow.ok());
}

TEST_CASE("scripted agents replay canned replies verbatim") {
  const std::string reply = "```diff\n" + std::string(kDiff) + "```\n";
  ScriptedAgent a({{"programmer", "", reply}, {"evaluator", checkout::sha256_hex("exact"), "by-hash"},
                   {"evaluator", "", "fallback"}});
  CHECK(a.complete("programmer", "anything") == reply);
  CHECK(a.complete("evaluator", "exact") == "by-hash");
  CHECK(a.complete("evaluator", "other") == "fallback");
  CHECK_THROWS_AS(a.complete("evaluator", "again"), AgentError);
  CHECK(a.prompts().size() == 4);

  auto b = ScriptedAgent::from_json({{"schema", "transcript_v1"},
                                     {"entries", {{{"role", "programmer"}, {"response", "one"}},
                                                  {{"role", "programmer"}, {"response", "two"}}}}});
  CHECK(b.complete("programmer", "p") == "one");
  auto cur = b.cursor();
  auto c = ScriptedAgent::from_json({{"schema", "transcript_v1"},
                                     {"entries", {{{"role", "programmer"}, {"response", "one"}},
                                                  {{"role", "programmer"}, {"response", "two"}}}}});
  c.restore(cur);
  CHECK(c.complete("programmer", "p") == "two");
  CHECK_THROWS_AS(ScriptedAgent::from_json({{"entries", json::array()}}), SchemaError);
}

TEST_CASE("programmer and evaluator replies are parsed strictly") {
  CHECK(fenced_block("text\n```json\n{}\n```\nmore", "json") == "{}\n");
  CHECK_THROWS_AS(fenced_block("no blocks here", "json"), SchemaError);
  CHECK_THROWS_AS(fenced_block("```json\n{}\n```\n```json\n{}\n```\n", "json"), SchemaError);

  const std::string diff_block = "```diff\n" + std::string(kDiff) + "```\n";
  auto p = parse_proposal(diff_block + "```json\n" + hypothesis_text("push_prop") + "\n```\n", kSlots);
  CHECK(p.diff == kDiff);
  CHECK(p.hypothesis.primary_slot == "push_prop");

  // Hypothesis carried as a new file in the diff.
  const auto hyp = hypothesis_text("ind_gen");
  std::string with_file = std::string(kDiff) + "--- /dev/null\n+++ b/Hypothesis.json\n@@ -0,0 +1,1 @@\n+" + hyp + "\n";
  auto q = parse_proposal("```diff\n" + with_file + "```\n", kSlots);
  CHECK(q.hypothesis.primary_slot == "ind_gen");
  auto stripped = without_hypothesis(patch::parse(q.diff));
  CHECK(stripped.touched() == std::vector<std::string>{"src/x.cpp"});

  CHECK_THROWS_AS(parse_proposal(diff_block, kSlots), SchemaError);
  CHECK_THROWS_AS(parse_proposal("```json\n" + hypothesis_text("ind_gen") + "\n```\n", kSlots), SchemaError);

  auto d = parse_diagnosis_reply("Here you go:\n```json\n" + diagnosis_doc().dump(2) + "\n```\n", kSlots, false);
  CHECK(d.decision == "REVERT");
  auto no_decision = diagnosis_doc();
  no_decision.erase("decision");
  CHECK_THROWS_AS(parse_diagnosis_reply("```json\n" + no_decision.dump() + "\n```", kSlots, false), SchemaError);
  CHECK_THROWS_AS(parse_diagnosis_reply("```json\n{not json\n```", kSlots, false), SchemaError);
}

TEST_CASE("the HTTP agent posts the prompt and reads the content field") {
  httplib::Server srv;
  json seen;
  srv.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(json{{"content", "reply to " + seen["role"].get<std::string>()}}.dump(), "application/json");
  });
  srv.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content("{\"other\": 1}", "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  HttpAgent agent(base + "/v1/complete", "m1", 10);
  CHECK(agent.complete("evaluator", "hello") == "reply to evaluator");
  CHECK(seen["model"] == "m1");
  CHECK(seen["prompt"] == "hello");
  CHECK_THROWS_AS(HttpAgent(base + "/broken", "m", 10).complete("programmer", "x"), AgentError);
  CHECK_THROWS_AS(HttpAgent(base + "/missing", "m", 10).complete("programmer", "x"), AgentError);
  srv.stop();
  t.join();
  CHECK_THROWS_AS(HttpAgent(base + "/v1/complete", "m", 2).complete("programmer", "x"), AgentError);
}

TEST_CASE("rubric evaluator decisions") {
  auto champ = bench::aggregate({run("a", true, 1.0), run("b", true, 2.0), run("c", false, 0)}, 10);
  auto inert = bench::aggregate({run("a", true, 1.01), run("b", true, 1.99), run("c", false, 0)}, 10);
  Evaluation e;
  e.champion = &champ;
  e.challenger = &inert;
  e.promotion = Promotion::Revert;
  e.slots = kSlots;
  e.touched_slots = {"ind_gen"};
  auto d = rubric_diagnosis(e);
  CHECK(d.decision == "RETRY");
  CHECK(d.reasons.size() >= 3);
  CHECK(d.reasons.size() <= 6);
  CHECK_FALSE(d.moveset.empty());
  CHECK_NOTHROW(parse_diagnosis(to_json(d), kSlots));

  auto better = bench::aggregate({run("a", true, 0.5), run("b", true, 0.5), run("c", true, 3)}, 10);
  e.challenger = &better;
  e.promotion = Promotion::Promote;
  CHECK(rubric_diagnosis(e).decision == "ACCEPT");

  auto worse = bench::aggregate({run("a", true, 4), run("b", true, 4), run("c", false, 0)}, 10);
  e.challenger = &worse;
  e.promotion = Promotion::Revert;
  CHECK(rubric_diagnosis(e).decision == "REVERT");

  Evaluation broken;
  broken.build_ok = false;
  broken.slots = kSlots;
  broken.touched_slots = {"push_prop"};
  auto bd = rubric_diagnosis(broken);
  CHECK(bd.decision == "REVERT");
  CHECK_NOTHROW(parse_diagnosis(to_json(bd), kSlots, true));

  Evaluation rejected;
  rejected.admitted = false;
  rejected.admission_errors = {"too many lines"};
  rejected.slots = kSlots;
  CHECK(rubric_diagnosis(rejected).decision == "REVERT");

  Evaluation gate;
  gate.gate_passed = false;
  gate.gate_reasons = {"x: consecution"};
  gate.slots = kSlots;
  CHECK(rubric_diagnosis(gate).decision == "REVERT");
}

TEST_CASE("prompt assembly respects budgets") {
  PromptInputs in;
  in.role = "programmer";
  in.slot_focus = {"ind_gen"};
  in.plan = "drop fewer literals";
  in.diff = kDiff;
  in.metrics = {{"par2", 1.5}};
  in.baseline = {{"par2", 2.0}};
  in.hypothesis = hypothesis_text("ind_gen");
  in.diagnosis = "RETRY";
  in.moves = {{"ind_gen", "x", 0.5, 0.1, 0.1}};
  in.code = {{"src/ic3/ind_gen.cpp", "int f();\n"}};
  for (int i = 0; i < 20; ++i) in.logs.push_back({"case" + std::to_string(i), double(i), "log of case " + std::to_string(i)});
  in.kb = "knowledge";
  PromptBudgets b;

  auto p = assemble_prompt(in, b);
  CHECK_FALSE(p.slim);
  std::vector<std::string> names;
  for (const auto& [n, size] : p.sections) names.push_back(n);
  CHECK(names == std::vector<std::string>{"ROLE", "SLOT_FOCUS", "PLAN", "HYPOTHESIS", "DIFF", "METRICS", "BASELINE",
                                          "DIAGNOSIS", "MOVESET", "CODE", "SLOW_CASES", "KB"});
  // Top 10% of 20 cases: the two slowest.
  CHECK(p.text.find("### case19 ") != std::string::npos);
  CHECK(p.text.find("### case18 ") != std::string::npos);
  CHECK(p.text.find("### case17 ") == std::string::npos);

  in.kb = std::string(10 * b.kb_chars, 'k');
  auto capped = assemble_prompt(in, b);
  std::size_t kb_section = 0;
  for (const auto& [n, size] : capped.sections)
    if (n == "KB") kb_section = size;
  const std::size_t header = std::string("## KB\n").size();
  CHECK(kb_section <= header + b.kb_chars + 2);
  CHECK(capped.text.find("[... KB truncated]") != std::string::npos);

  // Everything fits only without the KB.
  PromptBudgets tight = b;
  tight.total_chars = capped.text.size() - b.kb_chars / 2;
  auto slim = assemble_prompt(in, tight);
  CHECK(slim.slim);
  CHECK(slim.text.find("## KB") == std::string::npos);
  CHECK(slim.text.size() <= tight.total_chars);

  tight.total_chars = 100;
  try {
    assemble_prompt(in, tight);
    FAIL("expected PromptOverflow");
  } catch (const PromptOverflow& e) {
    std::string what = e.what();
    CHECK(what.find("ROLE=") != std::string::npos);
    CHECK(what.find("DIFF=") != std::string::npos);
  }

  CHECK(clip("abcdef", 100) == "abcdef");
  CHECK(clip(std::string(500, 'x'), 100).size() <= 100);
  auto tail = clip_tail("1\n2\n3\n4\n5\n", 2, 1000);
  CHECK(tail.find("4\n5") != std::string::npos);
  CHECK(tail.find("3\n") == std::string::npos);
}

TEST_CASE("run configs and slot manifests are validated") {
  TempDir tmp("config");
  checkout::write_file(tmp / "suite/a.aag", "aag 0 0 0 0 0\n");
  checkout::write_file(tmp / "t.json", R"({"schema": "transcript_v1", "entries": []})");
  json j = {{"schema", "run_config_v1"},
            {"baseline", "checkout"},
            {"run_dir", "run"},
            {"build", {{"command", "make"}, {"binary", "bin/solver"}}},
            {"suites",
             {{"evolution", "suite"},
              {"gate", {{{"path", "suite/a.aag"}, {"expect", "SAFE"}}, {{"path", "suite/a.aag"}, {"expect", "UNSAFE"}}}}}},
            {"schedule", {{{"mode", "sweep"}, {"rounds", 3}}, {{"mode", "compass_jump"}, {"rounds", 2}}}},
            {"agents", {{"programmer", {{"kind", "scripted"}, {"transcript", "t.json"}}}}}};
  auto c = parse_config(j, tmp.path());
  CHECK(c.total_rounds() == 5);
  CHECK(c.baseline == tmp / "checkout");
  CHECK(c.evolution_suite.size() == 1);
  CHECK(c.evaluator.kind == "rubric");
  CHECK(make_agent(c.evaluator) == nullptr);
  CHECK(make_agent(c.programmer) != nullptr);

  auto bad = j;
  bad["suites"]["gate"].erase(1);
  CHECK_THROWS(parse_config(bad, tmp.path()));
  bad = j;
  bad["surprise"] = 1;
  CHECK_THROWS(parse_config(bad, tmp.path()));
  bad = j;
  bad["schedule"][0]["mode"] = "random";
  CHECK_THROWS(parse_config(bad, tmp.path()));
  bad = j;
  bad["agents"].erase("programmer");
  CHECK_THROWS(parse_config(bad, tmp.path()));

  auto m = parse_manifest({{"schema", "slots_v1"},
                           {"slots", {{{"name", "ind_gen"}, {"files", {"a.cpp"}}}, {{"name", "push_prop"}, {"files", {"b.cpp"}}}}},
                           {"admission", {{"max_added_lines", 40}, {"forbidden", {"vendor/"}}}}});
  CHECK(m.slots == std::vector<std::string>{"ind_gen", "push_prop"});
  CHECK(m.files_of({"push_prop"}) == std::vector<std::string>{"b.cpp"});
  CHECK(m.slots_touching({"a.cpp", "c.cpp"}) == std::vector<std::string>{"ind_gen"});
  CHECK(m.rules.max_added_lines == 40);
  CHECK_THROWS(parse_manifest({{"schema", "slots_v1"}, {"slots", json::array()}}));
}
