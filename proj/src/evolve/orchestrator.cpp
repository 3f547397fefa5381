#include "slotic3/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "slotic3/checkout.hpp"

namespace slotic3::evolve {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const IterationRecord& r) {
  json guidance = json::array();
  for (const auto& m : r.scope.guidance) guidance.push_back(to_json(m));
  return {
      {"round", r.round},
      {"mode", r.mode},
      {"scope", {{"allowed", r.scope.allowed}, {"guidance", guidance}, {"jump", r.scope.jump}}},
      {"p_jump", r.p_jump},
      {"patch_sha256", r.patch_sha256},
      {"touched", r.touched},
      {"admitted", r.admitted},
      {"admission_errors", r.admission_errors},
      {"build_ok", r.build_ok},
      {"gate_passed", r.gate_passed},
      {"gate_reasons", r.gate_reasons},
      {"solved", r.solved},
      {"timeouts", r.timeouts},
      {"decision", r.decision},
      {"diagnosis", r.diagnosis},
      {"evaluator_fallback", r.evaluator_fallback},
      {"champion_hash", r.champion_hash},
      {"rollback_ok", r.rollback_ok},
      {"error", r.error},
  };
}

struct Orchestrator::Round {
  unsigned id = 0;
  fs::path dir;
  IterationRecord rec;
  std::string diff;
  std::optional<Hypothesis> hypothesis;
  std::string build_log;
  std::optional<GateOutcome> gate;
  std::optional<bench::BenchReport> challenger;
  fs::path binary;
};

namespace {

void write_json(const fs::path& p, const json& j) { checkout::write_file(p, j.dump(2) + "\n"); }

json summary(const bench::BenchReport& r) {
  json buckets = json::object();
  for (const auto& [k, b] : r.buckets)
    buckets[k] = {{"runs", b.runs}, {"solved", b.solved}, {"timeouts", b.timeouts}, {"par2_sec", b.par2}};
  return {{"par2_sec", r.par2},  {"solved", r.solved},     {"safe", r.safe_count},
          {"unsafe", r.unsafe_count}, {"timeouts", r.timeouts}, {"failed", r.failed},
          {"buckets", buckets}};
}

std::string tail(const std::string& s, std::size_t lines) { return clip_tail(s, lines, 4000); }

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

Orchestrator::Orchestrator(RunConfig cfg, std::unique_ptr<Agent> programmer, std::unique_ptr<Agent> evaluator)
    : cfg_(std::move(cfg)), programmer_(std::move(programmer)), evaluator_(std::move(evaluator)) {
  if (!programmer_) throw std::invalid_argument("a programmer agent is required");
  policy_.p_jump = cfg_.p_jump;
  policy_.jump_size = cfg_.jump_size;
  policy_.weights = cfg_.weights;
  policy_.bounds = cfg_.bounds;
  policy_.rng = PolicyRng(cfg_.seed);
}

fs::path Orchestrator::round_dir(unsigned r) const {
  std::ostringstream name;
  name << "r" << std::setw(3) << std::setfill('0') << r;
  return cfg_.run_dir / "rounds" / name.str();
}

std::string Orchestrator::mode_of(unsigned r) const {
  unsigned upto = 0;
  for (const auto& p : cfg_.schedule) {
    upto += p.rounds;
    if (r <= upto) return p.mode;
  }
  return cfg_.schedule.back().mode;
}

bench::SuiteOptions Orchestrator::suite_options(const fs::path& binary, double timeout, const fs::path& work) const {
  bench::SuiteOptions o;
  o.solver = {binary, cfg_.solver_args, cfg_.check_args};
  o.timeout = timeout;
  o.jobs = cfg_.jobs;
  o.work_dir = work;
  return o;
}

std::vector<CaseLog> Orchestrator::case_logs(const bench::BenchReport& r) const {
  std::vector<CaseLog> logs;
  for (const auto& run : r.runs) {
    CaseLog l{run.id, run.wall_time, "verdict " + run.verdict + "\n"};
    if (!run.log_path.empty()) {
      fs::path err = run.log_path;
      for (const auto& p : {err.parent_path() / "stdout.txt", err}) {
        try {
          l.text += checkout::read_file(p);
        } catch (const std::exception&) {
        }
      }
    }
    logs.push_back(std::move(l));
  }
  return logs;
}

std::string Orchestrator::kb_for(const std::vector<std::string>& slots) const {
  if (cfg_.kb.empty() || !fs::exists(cfg_.kb)) return {};
  if (!fs::is_directory(cfg_.kb)) return checkout::read_file(cfg_.kb);
  std::string out;
  std::vector<std::string> names = slots;
  names.push_back("general");
  for (const auto& n : names) {
    auto p = cfg_.kb / (n + ".md");
    if (fs::exists(p)) out += checkout::read_file(p) + "\n";
  }
  return out;
}

Scope Orchestrator::choose_scope(const std::string& mode) {
  if (mode == "compass_jump") return compass_jump(manifest_.slots, moves_, policy_);
  const auto& order = cfg_.sweep_order.empty() ? manifest_.slots : cfg_.sweep_order;
  Scope s;
  s.allowed = {order[sweep_index_ % order.size()]};
  for (const auto& m : rank_by_score(moves_, policy_.weights))
    if (m.slot == s.allowed.front()) s.guidance.push_back(m);
  return s;
}

std::optional<Proposal> Orchestrator::propose(const Scope& scope, const std::string& mode, Round& rd) {
  PromptInputs in;
  in.role = "programmer";
  in.slot_focus = scope.allowed;
  in.plan = "mode " + mode + (scope.jump ? ", jump" : "") + "; edit only: " + join(manifest_.files_of(scope.allowed), ", ");
  if (!last_diagnosis_.is_null()) in.diagnosis = last_diagnosis_.dump(1);
  in.moves = scope.guidance.empty() ? moves_ : scope.guidance;
  in.metrics = summary(champion_->report());
  for (const auto& f : manifest_.files_of(scope.allowed)) {
    try {
      in.code.push_back({f, checkout::read_file(work_dir() / f)});
    } catch (const std::exception&) {
    }
  }
  in.logs = case_logs(champion_->report());
  in.kb = kb_for(scope.allowed);

  std::string last_error;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const bool slim = attempt > 0;
    const std::string suffix = slim ? "_slim" : "";
    try {
      auto prompt = assemble_prompt(in, cfg_.budgets, slim);
      checkout::write_file(rd.dir / ("prompt_programmer" + suffix + ".txt"), prompt.text);
      auto reply = programmer_->complete("programmer", prompt.text);
      checkout::write_file(rd.dir / ("reply_programmer" + suffix + ".txt"), reply);
      return parse_proposal(reply, manifest_.slots);
    } catch (const AgentError& e) {
      last_error = e.what();
    } catch (const SchemaError& e) {
      last_error = e.what();
    } catch (const PromptOverflow& e) {
      last_error = e.what();
    }
    log("round " + std::to_string(rd.id) + ": programmer: " + last_error);
  }
  rd.rec.error = "programmer: " + last_error;
  return std::nullopt;
}

Diagnosis Orchestrator::diagnose(const Evaluation& ev, const Round& rd, bool& fallback) {
  fallback = false;
  if (!evaluator_) return rubric_diagnosis(ev);
  PromptInputs in;
  in.role = "evaluator";
  in.slot_focus = rd.rec.scope.allowed;
  std::string outcome = "admitted: " + std::string(rd.rec.admitted ? "yes" : "no");
  for (const auto& e : rd.rec.admission_errors) outcome += "\n  " + e;
  outcome += "\nbuild: " + std::string(rd.rec.build_ok ? "ok" : "failed");
  if (rd.rec.admitted && !rd.rec.build_ok) outcome += "\n" + tail(rd.build_log, 20);
  outcome += "\ngate: " + std::string(rd.rec.gate_passed ? "passed" : "failed");
  for (const auto& g : rd.rec.gate_reasons) outcome += "\n  " + g;
  if (ev.promotion) outcome += std::string("\npromotion rule: ") + (*ev.promotion == Promotion::Promote ? "PROMOTE" : "REVERT");
  in.plan = outcome;
  in.diff = rd.diff;
  if (rd.hypothesis) in.hypothesis = to_json(*rd.hypothesis).dump(1);
  if (ev.challenger) in.metrics = summary(*ev.challenger);
  if (ev.champion) in.baseline = summary(*ev.champion);
  in.moves = moves_;
  if (ev.challenger) in.logs = case_logs(*ev.challenger);
  in.kb = kb_for(rd.rec.scope.allowed);
  const bool fatal_build = rd.rec.admitted && !rd.rec.build_ok;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const bool slim = attempt > 0;
    const std::string suffix = slim ? "_slim" : "";
    std::string err;
    try {
      auto prompt = assemble_prompt(in, cfg_.budgets, slim);
      checkout::write_file(rd.dir / ("prompt_evaluator" + suffix + ".txt"), prompt.text);
      auto reply = evaluator_->complete("evaluator", prompt.text);
      checkout::write_file(rd.dir / ("reply_evaluator" + suffix + ".txt"), reply);
      return parse_diagnosis_reply(reply, manifest_.slots, fatal_build);
    } catch (const AgentError& e) {
      err = e.what();
    } catch (const SchemaError& e) {
      err = e.what();
    } catch (const PromptOverflow& e) {
      err = e.what();
    }
    log("round " + std::to_string(rd.id) + ": evaluator: " + err);
  }
  fallback = true;
  return rubric_diagnosis(ev);
}

std::string Orchestrator::build_and_stage(Round& rd) {
  auto res = checkout::run_shell(cfg_.build_command, work_dir(), cfg_.build_timeout_sec);
  rd.build_log = "$ " + cfg_.build_command + "\n" + res.output;
  if (res.timed_out) rd.build_log += "\n[build timed out]\n";
  rd.build_log += "\n[exit " + std::to_string(res.exit_code) + ", " + std::to_string(res.seconds) + " s]\n";
  checkout::write_file(rd.dir / "build.log", rd.build_log);
  if (!res.ok()) return {};
  auto built = work_dir() / cfg_.binary;
  if (!fs::exists(built)) {
    rd.build_log += "binary " + cfg_.binary.string() + " was not produced\n";
    checkout::write_file(rd.dir / "build.log", rd.build_log);
    return {};
  }
  auto hash = checkout::tree_hash(work_dir(), cfg_.exclude);
  auto staged = cfg_.run_dir / "bin" / hash;
  fs::create_directories(staged.parent_path());
  fs::copy_file(built, staged, fs::copy_options::overwrite_existing);
  rd.binary = staged;
  return hash;
}

void Orchestrator::start(bool resume) {
  if (resume) {
    load_state();
    return;
  }
  if (fs::exists(cfg_.run_dir / "state.json"))
    throw std::runtime_error(cfg_.run_dir.string() + " already holds a run; pass --resume to continue it");
  fs::create_directories(cfg_.run_dir);
  checkout::mirror(cfg_.baseline, champion_dir(), cfg_.exclude);
  champion_hash_ = checkout::tree_hash(champion_dir(), cfg_.exclude);
  manifest_ = parse_manifest(json::parse(checkout::read_file(champion_dir() / cfg_.manifest)));
  if (!cfg_.sweep_order.empty())
    for (const auto& s : cfg_.sweep_order)
      if (std::find(manifest_.slots.begin(), manifest_.slots.end(), s) == manifest_.slots.end())
        throw std::runtime_error("sweep order names unknown slot " + s);
  checkout::mirror(champion_dir(), work_dir(), cfg_.exclude);

  Round rd;
  rd.dir = round_dir(0);
  fs::remove_all(rd.dir);
  fs::create_directories(rd.dir);
  rd.rec.mode = "baseline";
  rd.rec.admitted = true;
  checkout::write_file(rd.dir / "patch.diff", "");
  write_json(rd.dir / "Hypothesis.json", nullptr);
  log("round 0: building the baseline");
  if (build_and_stage(rd).empty()) throw std::runtime_error("baseline does not build; see " + (rd.dir / "build.log").string());
  rd.rec.build_ok = true;
  log("round 0: gate suite");
  auto gate = hard_gate(cfg_.gate_suite, suite_options(rd.binary, cfg_.gate_timeout_sec, rd.dir / "gate_runs"));
  write_json(rd.dir / "gate.json", {{"passed", gate.passed}, {"reasons", gate.reasons}, {"metrics", bench::to_json(gate.report)}});
  if (!gate.passed) throw std::runtime_error("baseline fails the hard gate: " + join(gate.reasons, "; "));
  rd.rec.gate_passed = true;
  log("round 0: evolution suite");
  auto report = bench::run_suite(cfg_.evolution_suite, suite_options(rd.binary, cfg_.timeout_sec, rd.dir / "runs"));
  write_json(rd.dir / "metrics.json", bench::to_json(report));
  champion_ = admit(report, gate);
  if (!champion_) throw std::runtime_error("baseline evolution runs failed their artifact checks");
  write_json(rd.dir / "diagnosis.json", nullptr);
  champion_binary_ = rd.binary;
  champion_round_ = 0;
  round_ = 0;
  for (const auto& r : report.runs)
    if (r.solved()) rd.rec.solved.push_back(r.id);
  rd.rec.timeouts = report.timeouts;
  rd.rec.decision = "BASELINE";
  rd.rec.p_jump = policy_.p_jump;
  rd.rec.champion_hash = champion_hash_;
  write_json(rd.dir / "record.json", to_json(rd.rec));
  save_state();
  append_index(rd.rec);
}

IterationRecord Orchestrator::step() {
  if (!champion_) throw std::logic_error("start() must run first");
  if (finished()) throw std::logic_error("schedule already complete");
  Round rd;
  rd.id = round_ + 1;
  rd.dir = round_dir(rd.id);
  fs::remove_all(rd.dir);
  fs::create_directories(rd.dir);
  auto& rec = rd.rec;
  rec.round = rd.id;
  rec.mode = mode_of(rd.id);
  rec.scope = choose_scope(rec.mode);
  rec.p_jump = policy_.p_jump;
  {
    json guidance = json::array();
    for (const auto& m : rec.scope.guidance) guidance.push_back(to_json(m));
    write_json(rd.dir / "scope.json", {{"allowed", rec.scope.allowed}, {"guidance", guidance}, {"jump", rec.scope.jump}});
  }
  log("round " + std::to_string(rd.id) + " (" + rec.mode + "): scope " + join(rec.scope.allowed, ","));

  checkout::mirror(champion_dir(), work_dir(), cfg_.exclude);
  if (checkout::tree_hash(work_dir(), cfg_.exclude) != champion_hash_)
    throw std::runtime_error("work checkout does not match the champion before round " + std::to_string(rd.id));

  auto proposal = propose(rec.scope, rec.mode, rd);
  if (proposal) {
    rd.diff = proposal->diff;
    rd.hypothesis = proposal->hypothesis;
    rec.patch_sha256 = checkout::sha256_hex(rd.diff);
    checkout::write_file(rd.dir / "patch.diff", rd.diff);
    write_json(rd.dir / "Hypothesis.json", to_json(proposal->hypothesis));
    try {
      auto p = without_hypothesis(patch::parse(rd.diff));
      rec.touched = p.touched();
      rec.admission_errors = patch::admission_errors(p, manifest_.rules, manifest_.files_of(rec.scope.allowed));
      if (std::find(rec.scope.allowed.begin(), rec.scope.allowed.end(), proposal->hypothesis.primary_slot) ==
          rec.scope.allowed.end())
        rec.admission_errors.push_back("primary slot " + proposal->hypothesis.primary_slot + " is outside this round's scope");
      if (rec.admission_errors.empty()) patch::apply(p, work_dir());
    } catch (const patch::PatchError& e) {
      rec.admission_errors.push_back(e.what());
    }
    rec.admitted = rec.admission_errors.empty();
  } else {
    checkout::write_file(rd.dir / "patch.diff", "");
    write_json(rd.dir / "Hypothesis.json", nullptr);
    rec.admission_errors.push_back("no proposal");
  }

  std::optional<GatedReport> gated;
  std::optional<Promotion> decision;
  if (rec.admitted) {
    log("round " + std::to_string(rd.id) + ": building");
    rec.build_ok = !build_and_stage(rd).empty();
  } else {
    checkout::write_file(rd.dir / "build.log", "not built: patch rejected\n");
  }
  if (rec.build_ok) {
    log("round " + std::to_string(rd.id) + ": gate suite");
    rd.gate = hard_gate(cfg_.gate_suite, suite_options(rd.binary, cfg_.gate_timeout_sec, rd.dir / "gate_runs"));
    rec.gate_passed = rd.gate->passed;
    rec.gate_reasons = rd.gate->reasons;
    write_json(rd.dir / "gate.json",
               {{"passed", rd.gate->passed}, {"reasons", rd.gate->reasons}, {"metrics", bench::to_json(rd.gate->report)}});
  } else {
    write_json(rd.dir / "gate.json", {{"passed", false}, {"reasons", json::array()}, {"skipped", "not built"}});
  }
  if (rec.gate_passed) {
    log("round " + std::to_string(rd.id) + ": evolution suite");
    rd.challenger = bench::run_suite(cfg_.evolution_suite, suite_options(rd.binary, cfg_.timeout_sec, rd.dir / "runs"));
    write_json(rd.dir / "metrics.json", bench::to_json(*rd.challenger));
    gated = admit(*rd.challenger, *rd.gate);
    if (gated) decision = promote(*champion_, *gated, cfg_.promotion);
    for (const auto& r : rd.challenger->runs)
      if (r.solved()) rec.solved.push_back(r.id);
    rec.timeouts = rd.challenger->timeouts;
  } else {
    write_json(rd.dir / "metrics.json", {{"skipped", rec.build_ok ? "gate failed" : "not built"}});
  }

  Evaluation ev;
  ev.admitted = rec.admitted;
  ev.admission_errors = rec.admission_errors;
  ev.build_ok = rec.build_ok;
  ev.gate_passed = rec.gate_passed;
  ev.gate_reasons = rec.gate_reasons;
  ev.champion = &champion_->report();
  ev.challenger = rd.challenger ? &*rd.challenger : nullptr;
  ev.promotion = decision;
  ev.rule = cfg_.promotion;
  ev.touched_slots = manifest_.slots_touching(rec.touched);
  ev.slots = manifest_.slots;
  auto diag = diagnose(ev, rd, rec.evaluator_fallback);
  rec.diagnosis = diag.decision;
  write_json(rd.dir / "diagnosis.json", to_json(diag));

  const bool promoted = decision == Promotion::Promote;
  double delta = 0;
  if (rd.challenger) {
    delta = rd.challenger->par2 - champion_->report().par2;
    if (std::abs(delta) <= inert_tolerance(champion_->report(), cfg_.promotion)) delta = 0;
  }
  if (promoted) {
    checkout::mirror(work_dir(), champion_dir(), cfg_.exclude);
    champion_hash_ = checkout::tree_hash(champion_dir(), cfg_.exclude);
    champion_ = std::move(gated);
    champion_binary_ = rd.binary;
    champion_round_ = rd.id;
  } else {
    checkout::mirror(champion_dir(), work_dir(), cfg_.exclude);
    rec.rollback_ok = checkout::tree_hash(work_dir(), cfg_.exclude) == champion_hash_;
  }
  rec.decision = promoted ? "PROMOTE" : "REVERT";
  rec.champion_hash = champion_hash_;

  policy_.history.push_back({promoted, delta});
  if (!diag.moveset.empty()) moves_ = diag.moveset;
  last_diagnosis_ = to_json(diag);
  if (rec.mode == "sweep") {
    const auto n = (cfg_.sweep_order.empty() ? manifest_.slots : cfg_.sweep_order).size();
    if (promoted) {
      sweep_misses_ = 0;
    } else if (++sweep_misses_ >= cfg_.sweep_patience) {
      sweep_index_ = (sweep_index_ + 1) % n;
      sweep_misses_ = 0;
    }
  }
  round_ = rd.id;
  write_json(rd.dir / "record.json", to_json(rec));
  save_state();
  append_index(rec);
  log("round " + std::to_string(rd.id) + ": " + rec.decision + " (" + rec.diagnosis + ")");
  if (!rec.rollback_ok) throw std::runtime_error("rollback left the work checkout different from the champion");
  return rec;
}

std::vector<IterationRecord> Orchestrator::run(std::optional<unsigned> max_rounds) {
  std::vector<IterationRecord> out;
  while (!finished() && (!max_rounds || out.size() < *max_rounds)) out.push_back(step());
  return out;
}

void Orchestrator::save_state() const {
  json history = json::array();
  for (const auto& h : policy_.history) history.push_back({{"promoted", h.promoted}, {"par2_delta", h.par2_delta}});
  json moves = json::array();
  for (const auto& m : moves_) moves.push_back(to_json(m));
  json st{
      {"schema", "evolve_state_v1"},
      {"round", round_},
      {"champion_round", champion_round_},
      {"champion_hash", champion_hash_},
      {"champion_binary", champion_binary_.string()},
      {"p_jump", policy_.p_jump},
      {"history", history},
      {"rng", policy_.rng.state()},
      {"moves", moves},
      {"last_diagnosis", last_diagnosis_},
      {"sweep_index", sweep_index_},
      {"sweep_misses", sweep_misses_},
      {"programmer_cursor", programmer_->cursor()},
      {"evaluator_cursor", evaluator_ ? evaluator_->cursor() : json(nullptr)},
  };
  auto tmp = cfg_.run_dir / "state.json.tmp";
  write_json(tmp, st);
  fs::rename(tmp, cfg_.run_dir / "state.json");
}

void Orchestrator::load_state() {
  auto st = json::parse(checkout::read_file(cfg_.run_dir / "state.json"));
  if (st.value("schema", "") != "evolve_state_v1") throw std::runtime_error("state.json: unknown schema");
  round_ = st.at("round");
  champion_round_ = st.at("champion_round");
  champion_hash_ = st.at("champion_hash");
  champion_binary_ = st.at("champion_binary").get<std::string>();
  policy_.p_jump = st.at("p_jump");
  policy_.history.clear();
  for (const auto& h : st.at("history")) policy_.history.push_back({h.at("promoted"), h.at("par2_delta")});
  policy_.rng.restore(st.at("rng"));
  moves_.clear();
  for (const auto& m : st.at("moves"))
    moves_.push_back({m.at("slot"), m.at("direction"), m.at("conf"), m.at("risk"), m.at("cost")});
  last_diagnosis_ = st.at("last_diagnosis");
  sweep_index_ = st.at("sweep_index");
  sweep_misses_ = st.at("sweep_misses");
  programmer_->restore(st.at("programmer_cursor"));
  if (evaluator_) evaluator_->restore(st.at("evaluator_cursor"));

  if (checkout::tree_hash(champion_dir(), cfg_.exclude) != champion_hash_)
    throw std::runtime_error("champion checkout does not match the recorded hash " + champion_hash_);
  manifest_ = parse_manifest(json::parse(checkout::read_file(champion_dir() / cfg_.manifest)));
  auto cdir = round_dir(champion_round_);
  auto gate_doc = json::parse(checkout::read_file(cdir / "gate.json"));
  GateOutcome gate;
  gate.passed = gate_doc.at("passed");
  champion_ = admit(bench::from_json(json::parse(checkout::read_file(cdir / "metrics.json"))), gate);
  if (!champion_) throw std::runtime_error("recorded champion report did not pass its gate");

  // state.json is written before the index line, so the index may lag by
  // one round after an interruption.
  std::vector<std::string> lines;
  {
    std::ifstream in(cfg_.run_dir / "index.jsonl");
    for (std::string l; std::getline(in, l);)
      if (!l.empty()) lines.push_back(l);
  }
  if (lines.size() > round_ + 1) lines.resize(round_ + 1);
  for (auto r = static_cast<unsigned>(lines.size()); r <= round_; ++r)
    lines.push_back(json::parse(checkout::read_file(round_dir(r) / "record.json")).dump());
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  checkout::write_file(cfg_.run_dir / "index.jsonl", text);
}

void Orchestrator::append_index(const IterationRecord& rec) const {
  std::ofstream out(cfg_.run_dir / "index.jsonl", std::ios::app);
  out << to_json(rec).dump() << "\n";
  if (!out) throw std::runtime_error("cannot append to index.jsonl");
}

ReplayResult replay_champion(const RunConfig& cfg, const fs::path& scratch) {
  ReplayResult r;
  auto st = json::parse(checkout::read_file(cfg.run_dir / "state.json"));
  r.expected_hash = st.at("champion_hash");
  std::ifstream in(cfg.run_dir / "index.jsonl");
  checkout::mirror(cfg.baseline, scratch, cfg.exclude);
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    auto rec = json::parse(line);
    if (rec.at("decision") != "PROMOTE") continue;
    unsigned round = rec.at("round");
    r.promoted_rounds.push_back(round);
    std::ostringstream name;
    name << "r" << std::setw(3) << std::setfill('0') << round;
    try {
      auto diff = checkout::read_file(cfg.run_dir / "rounds" / name.str() / "patch.diff");
      patch::apply(without_hypothesis(patch::parse(diff)), scratch);
    } catch (const std::exception& e) {
      r.reasons.push_back("round " + std::to_string(round) + ": " + e.what());
      return r;
    }
  }
  r.rebuilt_hash = checkout::tree_hash(scratch, cfg.exclude);
  if (r.rebuilt_hash != r.expected_hash) r.reasons.push_back("rebuilt tree hash differs from the champion");
  auto build = checkout::run_shell(cfg.build_command, scratch, cfg.build_timeout_sec);
  r.build_ok = build.ok() && fs::exists(scratch / cfg.binary);
  if (!r.build_ok) {
    r.reasons.push_back("rebuild failed:\n" + tail(build.output, 20));
    return r;
  }
  bench::SuiteOptions o;
  o.solver = {scratch / cfg.binary, cfg.solver_args, cfg.check_args};
  o.timeout = cfg.gate_timeout_sec;
  o.jobs = cfg.jobs;
  o.work_dir = scratch.string() + ".gate";
  auto gate = hard_gate(cfg.gate_suite, o);
  r.gate_passed = gate.passed;
  for (const auto& g : gate.reasons) r.reasons.push_back("gate: " + g);
  r.ok = r.reasons.empty();
  return r;
}

}  // namespace slotic3::evolve
