#include <algorithm>
#include <set>
#include <stdexcept>

#include "slotic3/checkout.hpp"
#include "slotic3/orchestrator.hpp"

namespace slotic3::evolve {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> SlotManifest::files_of(const std::vector<std::string>& chosen) const {
  std::vector<std::string> out;
  for (const auto& s : chosen)
    if (auto it = files.find(s); it != files.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  return out;
}

std::vector<std::string> SlotManifest::slots_touching(const std::vector<std::string>& paths) const {
  std::vector<std::string> out;
  for (const auto& s : slots)
    for (const auto& f : files.at(s))
      if (std::find(paths.begin(), paths.end(), f) != paths.end() && std::find(out.begin(), out.end(), s) == out.end())
        out.push_back(s);
  return out;
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw std::runtime_error(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, _] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) bad(where, "unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(where + "." + key, "wrong type");
  }
}

double unit(const json& j, const char* key, double def, const std::string& where) {
  double v = def;
  read(j, key, v, where);
  if (v < 0 || v > 1) bad(where + "." + key, "must lie in [0,1]");
  return v;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.empty() || p.is_absolute() ? p : base / p; }

AgentConfig agent_config(const json& j, const fs::path& base, const std::string& where) {
  only_keys(j, where, {"kind", "transcript", "endpoint", "model", "timeout_sec"});
  AgentConfig a;
  read(j, "kind", a.kind, where);
  std::string transcript;
  read(j, "transcript", transcript, where);
  a.transcript = resolve(base, transcript);
  read(j, "endpoint", a.endpoint, where);
  read(j, "model", a.model, where);
  read(j, "timeout_sec", a.timeout_sec, where);
  if (a.kind == "scripted" && a.transcript.empty()) bad(where, "scripted agent needs 'transcript'");
  if (a.kind == "http" && a.endpoint.empty()) bad(where, "http agent needs 'endpoint'");
  if (a.kind != "scripted" && a.kind != "http" && a.kind != "rubric") bad(where + ".kind", "unknown agent kind " + a.kind);
  if (a.timeout_sec <= 0) bad(where + ".timeout_sec", "must be positive");
  return a;
}

}  // namespace

SlotManifest parse_manifest(const json& j) {
  only_keys(j, "manifest", {"schema", "slots", "admission"});
  if (j.value("schema", "") != "slots_v1") bad("manifest", "schema must be slots_v1");
  if (!j.contains("slots") || !j["slots"].is_array() || j["slots"].empty()) bad("manifest.slots", "expected a nonempty array");
  SlotManifest m;
  for (const auto& s : j["slots"]) {
    only_keys(s, "manifest.slots[]", {"name", "files"});
    std::string name;
    std::vector<std::string> files;
    read(s, "name", name, "manifest.slots[]");
    read(s, "files", files, "manifest.slots[]");
    if (name.empty() || files.empty()) bad("manifest.slots[]", "every slot needs a name and files");
    if (m.files.count(name)) bad("manifest.slots", "duplicate slot " + name);
    m.slots.push_back(name);
    m.files[name] = files;
  }
  if (j.contains("admission")) {
    const auto& a = j["admission"];
    only_keys(a, "manifest.admission", {"max_added_lines", "max_files", "extensions", "forbidden"});
    read(a, "max_added_lines", m.rules.max_added_lines, "manifest.admission");
    read(a, "max_files", m.rules.max_files, "manifest.admission");
    read(a, "extensions", m.rules.extensions, "manifest.admission");
    read(a, "forbidden", m.rules.forbidden, "manifest.admission");
  }
  return m;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& c) {
  if (c.kind == "scripted") return std::make_unique<ScriptedAgent>(ScriptedAgent::load(c.transcript));
  if (c.kind == "http") return std::make_unique<HttpAgent>(c.endpoint, c.model, c.timeout_sec);
  return nullptr;
}

unsigned RunConfig::total_rounds() const {
  unsigned n = 0;
  for (const auto& p : schedule) n += p.rounds;
  return n;
}

RunConfig parse_config(const json& j, const fs::path& base) {
  only_keys(j, "config", {"schema", "baseline", "run_dir", "manifest", "build", "solver", "suites", "schedule", "sweep",
                          "policy", "promotion", "prompt", "kb", "exclude", "agents"});
  if (j.value("schema", "") != "run_config_v1") bad("config", "schema must be run_config_v1");
  RunConfig c;
  std::string s;
  read(j, "baseline", s, "config");
  if (s.empty()) bad("config.baseline", "required");
  c.baseline = resolve(base, s);
  s.clear();
  read(j, "run_dir", s, "config");
  if (s.empty()) bad("config.run_dir", "required");
  c.run_dir = resolve(base, s);
  s = c.manifest.string();
  read(j, "manifest", s, "config");
  c.manifest = s;

  if (!j.contains("build")) bad("config.build", "required");
  const auto& b = j["build"];
  only_keys(b, "config.build", {"command", "timeout_sec", "binary"});
  read(b, "command", c.build_command, "config.build");
  read(b, "timeout_sec", c.build_timeout_sec, "config.build");
  s.clear();
  read(b, "binary", s, "config.build");
  c.binary = s;
  if (c.build_command.empty() || c.binary.empty()) bad("config.build", "needs 'command' and 'binary'");

  if (j.contains("solver")) {
    only_keys(j["solver"], "config.solver", {"args", "check_args"});
    read(j["solver"], "args", c.solver_args, "config.solver");
    read(j["solver"], "check_args", c.check_args, "config.solver");
  }

  if (!j.contains("suites")) bad("config.suites", "required");
  const auto& su = j["suites"];
  only_keys(su, "config.suites", {"evolution", "gate", "timeout_sec", "gate_timeout_sec", "jobs"});
  if (!su.contains("evolution")) bad("config.suites.evolution", "required");
  if (su["evolution"].is_string()) {
    c.evolution_suite = bench::expand_suite(resolve(base, su["evolution"].get<std::string>()));
  } else {
    std::vector<std::string> paths;
    read(su, "evolution", paths, "config.suites");
    for (const auto& p : paths) c.evolution_suite.push_back(resolve(base, p));
  }
  if (c.evolution_suite.empty()) bad("config.suites.evolution", "no instances");
  if (!su.contains("gate") || !su["gate"].is_array()) bad("config.suites.gate", "expected an array");
  bool has_safe = false, has_unsafe = false;
  for (const auto& g : su["gate"]) {
    only_keys(g, "config.suites.gate[]", {"path", "expect"});
    GateInstance gi;
    std::string p;
    read(g, "path", p, "config.suites.gate[]");
    read(g, "expect", gi.expect, "config.suites.gate[]");
    if (p.empty()) bad("config.suites.gate[]", "needs 'path'");
    if (!gi.expect.empty() && gi.expect != "SAFE" && gi.expect != "UNSAFE")
      bad("config.suites.gate[].expect", "must be SAFE or UNSAFE");
    gi.path = resolve(base, p);
    has_safe |= gi.expect == "SAFE";
    has_unsafe |= gi.expect == "UNSAFE";
    c.gate_suite.push_back(gi);
  }
  if (!has_safe || !has_unsafe) bad("config.suites.gate", "needs at least one known-SAFE and one known-UNSAFE instance");
  read(su, "timeout_sec", c.timeout_sec, "config.suites");
  c.gate_timeout_sec = c.timeout_sec;
  read(su, "gate_timeout_sec", c.gate_timeout_sec, "config.suites");
  read(su, "jobs", c.jobs, "config.suites");
  if (c.timeout_sec <= 0 || c.gate_timeout_sec <= 0) bad("config.suites", "timeouts must be positive");
  if (c.jobs == 0) bad("config.suites.jobs", "must be positive");

  if (!j.contains("schedule") || !j["schedule"].is_array() || j["schedule"].empty())
    bad("config.schedule", "expected a nonempty array");
  for (const auto& p : j["schedule"]) {
    only_keys(p, "config.schedule[]", {"mode", "rounds"});
    Phase ph;
    read(p, "mode", ph.mode, "config.schedule[]");
    read(p, "rounds", ph.rounds, "config.schedule[]");
    if (ph.mode != "sweep" && ph.mode != "compass_jump") bad("config.schedule[].mode", "must be sweep or compass_jump");
    c.schedule.push_back(ph);
  }

  if (j.contains("sweep")) {
    only_keys(j["sweep"], "config.sweep", {"patience", "order"});
    read(j["sweep"], "patience", c.sweep_patience, "config.sweep");
    read(j["sweep"], "order", c.sweep_order, "config.sweep");
    if (c.sweep_patience == 0) bad("config.sweep.patience", "must be positive");
  }

  if (j.contains("policy")) {
    const auto& p = j["policy"];
    const std::string w = "config.policy";
    only_keys(p, w, {"p_jump", "jump_size", "weights", "bounds", "seed"});
    read(p, "jump_size", c.jump_size, w);
    read(p, "seed", c.seed, w);
    if (c.jump_size != 2 && c.jump_size != 3) bad(w + ".jump_size", "must be 2 or 3");
    if (p.contains("weights")) {
      only_keys(p["weights"], w + ".weights", {"conf", "risk", "cost"});
      read(p["weights"], "conf", c.weights.conf, w + ".weights");
      read(p["weights"], "risk", c.weights.risk, w + ".weights");
      read(p["weights"], "cost", c.weights.cost, w + ".weights");
    }
    if (p.contains("bounds")) {
      const auto& bd = p["bounds"];
      only_keys(bd, w + ".bounds", {"p_min", "p_max", "shrink", "grow", "steady_streak", "stagnant_streak"});
      c.bounds.p_min = unit(bd, "p_min", c.bounds.p_min, w + ".bounds");
      c.bounds.p_max = unit(bd, "p_max", c.bounds.p_max, w + ".bounds");
      c.bounds.shrink = unit(bd, "shrink", c.bounds.shrink, w + ".bounds");
      c.bounds.grow = unit(bd, "grow", c.bounds.grow, w + ".bounds");
      read(bd, "steady_streak", c.bounds.steady_streak, w + ".bounds");
      read(bd, "stagnant_streak", c.bounds.stagnant_streak, w + ".bounds");
      if (c.bounds.p_min > c.bounds.p_max) bad(w + ".bounds", "p_min exceeds p_max");
    }
    c.p_jump = unit(p, "p_jump", c.p_jump, w);
    if (c.p_jump < c.bounds.p_min || c.p_jump > c.bounds.p_max) bad(w + ".p_jump", "outside [p_min, p_max]");
  }

  if (j.contains("promotion")) {
    only_keys(j["promotion"], "config.promotion", {"regression_budget", "min_improvement_sec"});
    read(j["promotion"], "regression_budget", c.promotion.regression_budget, "config.promotion");
    read(j["promotion"], "min_improvement_sec", c.promotion.min_improvement_sec, "config.promotion");
    if (c.promotion.min_improvement_sec < 0) bad("config.promotion.min_improvement_sec", "must be non-negative");
  }

  if (j.contains("prompt")) {
    const auto& p = j["prompt"];
    const std::string w = "config.prompt";
    only_keys(p, w, {"total_chars", "diff_chars", "code_chars", "metrics_chars", "top_k_percent", "log_lines",
                     "log_chars", "kb_chars", "max_moves"});
    auto& bu = c.budgets;
    read(p, "total_chars", bu.total_chars, w);
    read(p, "diff_chars", bu.diff_chars, w);
    read(p, "code_chars", bu.code_chars, w);
    read(p, "metrics_chars", bu.metrics_chars, w);
    read(p, "top_k_percent", bu.top_k_percent, w);
    read(p, "log_lines", bu.log_lines, w);
    read(p, "log_chars", bu.log_chars, w);
    read(p, "kb_chars", bu.kb_chars, w);
    read(p, "max_moves", bu.max_moves, w);
    if (bu.total_chars == 0 || bu.top_k_percent <= 0 || bu.top_k_percent > 100) bad(w, "budgets must be positive");
  }

  s.clear();
  read(j, "kb", s, "config");
  c.kb = resolve(base, s);
  read(j, "exclude", c.exclude, "config");

  if (j.contains("agents")) {
    only_keys(j["agents"], "config.agents", {"programmer", "evaluator"});
    if (j["agents"].contains("programmer"))
      c.programmer = agent_config(j["agents"]["programmer"], base, "config.agents.programmer");
    if (j["agents"].contains("evaluator"))
      c.evaluator = agent_config(j["agents"]["evaluator"], base, "config.agents.evaluator");
  }
  if (!j.contains("agents") || !j["agents"].contains("programmer")) bad("config.agents.programmer", "required");
  if (c.programmer.kind == "rubric") bad("config.agents.programmer.kind", "the programmer must be scripted or http");
  return c;
}

RunConfig load_config(const fs::path& file) {
  json j;
  try {
    j = json::parse(checkout::read_file(file));
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
  return parse_config(j, fs::absolute(file).parent_path());
}

}  // namespace slotic3::evolve
