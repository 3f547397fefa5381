#include "slotic3/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <httplib.h>

#include "slotic3/checkout.hpp"
#include "slotic3/patch.hpp"

namespace slotic3::evolve {

using nlohmann::json;

ScriptedAgent ScriptedAgent::from_json(const json& j) {
  if (!j.is_object() || j.value("schema", "") != "transcript_v1" || !j.contains("entries") || !j["entries"].is_array())
    throw SchemaError("transcript: expected {\"schema\": \"transcript_v1\", \"entries\": [...]}");
  std::vector<Entry> entries;
  for (const auto& e : j["entries"]) {
    if (!e.is_object() || !e.contains("role") || !e["role"].is_string() || !e.contains("response") ||
        !e["response"].is_string())
      throw SchemaError("transcript: every entry needs string 'role' and 'response'");
    Entry x;
    x.role = e["role"];
    x.response = e["response"];
    if (e.contains("prompt_sha256") && e["prompt_sha256"].is_string()) x.prompt_sha256 = e["prompt_sha256"];
    entries.push_back(std::move(x));
  }
  return ScriptedAgent(std::move(entries));
}

ScriptedAgent ScriptedAgent::load(const std::filesystem::path& p) {
  try {
    return from_json(json::parse(checkout::read_file(p)));
  } catch (const json::exception& e) {
    throw SchemaError(p.string() + ": " + e.what());
  }
}

std::string ScriptedAgent::complete(const std::string& role, const std::string& prompt) {
  prompts_.push_back(prompt);
  const auto hash = checkout::sha256_hex(prompt);
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < entries_.size() && !pick; ++i)
    if (!used_[i] && entries_[i].role == role && entries_[i].prompt_sha256 == hash) pick = i;
  for (std::size_t i = 0; i < entries_.size() && !pick; ++i)
    if (!used_[i] && entries_[i].role == role && entries_[i].prompt_sha256.empty()) pick = i;
  for (std::size_t i = 0; i < entries_.size() && !pick; ++i)
    if (!used_[i] && entries_[i].role == role) pick = i;
  if (!pick) throw AgentError("transcript has no unused " + role + " entry");
  used_[*pick] = true;
  return entries_[*pick].response;
}

json ScriptedAgent::cursor() const {
  json used = json::array();
  for (std::size_t i = 0; i < used_.size(); ++i)
    if (used_[i]) used.push_back(i);
  return used;
}

void ScriptedAgent::restore(const json& c) {
  std::fill(used_.begin(), used_.end(), false);
  if (!c.is_array()) return;
  for (const auto& i : c) {
    auto k = i.get<std::size_t>();
    if (k < used_.size()) used_[k] = true;
  }
}

HttpAgent::HttpAgent(std::string endpoint, std::string model, double timeout_sec)
    : model_(std::move(model)), timeout_sec_(timeout_sec) {
  auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw AgentError("endpoint must be a URL: " + endpoint);
  auto slash = endpoint.find('/', scheme + 3);
  scheme_host_port_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

std::string HttpAgent::complete(const std::string& role, const std::string& prompt) {
  httplib::Client cli(scheme_host_port_);
  auto secs = static_cast<time_t>(std::ceil(timeout_sec_));
  cli.set_connection_timeout(secs, 0);
  cli.set_read_timeout(secs, 0);
  cli.set_write_timeout(secs, 0);
  json body{{"model", model_}, {"role", role}, {"prompt", prompt}};
  auto res = cli.Post(path_, body.dump(), "application/json");
  if (!res) throw AgentError("agent request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw AgentError("agent returned HTTP " + std::to_string(res->status));
  try {
    auto j = json::parse(res->body);
    if (!j.contains("content") || !j["content"].is_string()) throw AgentError("agent reply lacks 'content'");
    return j["content"];
  } catch (const json::exception& e) {
    throw AgentError(std::string("agent reply is not JSON: ") + e.what());
  }
}

std::string fenced_block(const std::string& text, const std::string& lang) {
  std::vector<std::string> blocks;
  std::istringstream in(text);
  std::string line, cur;
  bool inside = false, keep = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("```", 0) == 0) {
      if (inside && keep) blocks.push_back(cur);
      if (!inside) {
        auto tag = line.substr(3);
        tag.erase(std::remove(tag.begin(), tag.end(), ' '), tag.end());
        keep = tag == lang;
        cur.clear();
      }
      inside = !inside;
      continue;
    }
    if (inside && keep) cur += line + "\n";
  }
  if (inside) throw SchemaError("unterminated fenced block");
  if (blocks.empty()) throw SchemaError("reply has no ```" + lang + " block");
  if (blocks.size() > 1) throw SchemaError("reply has " + std::to_string(blocks.size()) + " ```" + lang + " blocks");
  return blocks.front();
}

namespace {

json parse_json_block(const std::string& reply) {
  try {
    return json::parse(fenced_block(reply, "json"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("json block does not parse: ") + e.what());
  }
}

}  // namespace

Proposal parse_proposal(const std::string& reply, const std::vector<std::string>& slots) {
  Proposal p;
  p.diff = fenced_block(reply, "diff");
  // The hypothesis may arrive as a created Hypothesis.json in the diff.
  std::optional<json> doc;
  try {
    for (const auto& f : patch::parse(p.diff).files) {
      if (f.path() != kHypothesisFile || !f.creates()) continue;
      std::string text;
      for (const auto& h : f.hunks)
        for (const auto& l : h.lines) text += l.substr(1) + "\n";
      doc = json::parse(text);
    }
  } catch (const patch::PatchError&) {
  } catch (const json::exception& e) {
    throw SchemaError(std::string(kHypothesisFile) + " does not parse: " + e.what());
  }
  p.hypothesis = parse_hypothesis(doc ? *doc : parse_json_block(reply), slots);
  return p;
}

patch::Patch without_hypothesis(patch::Patch p) {
  std::erase_if(p.files, [](const patch::FilePatch& f) { return f.path() == kHypothesisFile; });
  return p;
}

Diagnosis parse_diagnosis_reply(const std::string& reply, const std::vector<std::string>& slots, bool fatal_build) {
  return parse_diagnosis(parse_json_block(reply), slots, fatal_build);
}

double inert_tolerance(const bench::BenchReport& champion, const PromotionRule& rule) {
  return std::max(rule.min_improvement_sec, 0.05 * champion.par2);
}

namespace {

std::map<std::string, double> counter_totals(const bench::BenchReport& r) {
  std::map<std::string, double> t;
  // Timed-out runs report counters that depend on where the clock hit.
  for (const auto& run : r.runs) {
    if (!run.solved()) continue;
    for (const auto& [k, v] : run.counters) {
      try {
        t[k] += std::stod(v);
      } catch (const std::exception&) {
      }
    }
  }
  return t;
}

double ratio(double a, double b) { return b > 0 ? std::clamp(a / b, 0.0, 1.0) : 0.0; }

MoveSet derive_moves(const Evaluation& e) {
  const bench::BenchReport* basis = e.challenger && e.challenger->all_ok() ? e.challenger : e.champion;
  std::map<std::string, double> t;
  if (basis) t = counter_totals(*basis);
  auto c = [&](const char* k) { return t.count(k) ? t.at(k) : 0.0; };
  MoveSet moves;
  for (const auto& slot : e.slots) {
    Move m{slot, "revisit " + slot, 0.3, 0.5, 0.5};
    if (slot == "push_prop") {
      m.direction = "skip or budget frames whose clauses repeatedly fail to push";
      m.conf = 1.0 - ratio(c("push_successes"), c("push_attempts"));
      m.risk = 0.2;
      m.cost = 0.3;
    } else if (slot == "ind_gen") {
      m.direction = "cut generalization queries that rarely drop literals";
      m.conf = 1.0 - ratio(c("indgen_dropped"), c("indgen_queries"));
      m.risk = 0.4;
      m.cost = 0.5;
    } else if (slot == "po_handling") {
      m.direction = "discard or reorder obligations that go stale";
      m.conf = ratio(c("stale_obligations"), c("obligations"));
      m.risk = 0.3;
      m.cost = 0.3;
    } else if (slot == "pred_gen") {
      m.direction = "cheapen predecessor lifting";
      m.conf = ratio(c("lift_queries"), c("sat_calls"));
      m.risk = 0.3;
      m.cost = 0.4;
    }
    const bool touched = std::find(e.touched_slots.begin(), e.touched_slots.end(), slot) != e.touched_slots.end();
    if (touched && e.promotion == Promotion::Promote) m.conf += 0.2;
    if (touched && (!e.gate_passed || !e.build_ok)) m.risk += 0.3;
    m.conf = std::clamp(m.conf, 0.0, 1.0);
    m.risk = std::clamp(m.risk, 0.0, 1.0);
    moves.push_back(m);
  }
  return moves;
}

}  // namespace

Diagnosis rubric_diagnosis(const Evaluation& e) {
  Diagnosis d;
  auto reason = [&](std::string metric, double value, std::string note) {
    d.reasons.push_back({std::move(metric), value, std::move(note)});
  };
  std::ostringstream ev;
  if (!e.admitted) {
    d.decision = "REVERT";
    reason("admission_errors", static_cast<double>(e.admission_errors.size()), "patch rejected before building");
    for (const auto& s : e.admission_errors) ev << s << "\n";
  } else if (!e.build_ok) {
    d.decision = "REVERT";
    reason("build_ok", 0, "challenger failed to build");
  } else if (!e.gate_passed) {
    d.decision = "REVERT";
    reason("gate_failures", static_cast<double>(e.gate_reasons.size()), "hard gate rejected the challenger");
    for (const auto& s : e.gate_reasons) ev << s << "\n";
  } else if (!e.challenger || !e.challenger->all_ok()) {
    d.decision = "REVERT";
    reason("failed_runs", e.challenger ? static_cast<double>(e.challenger->failed) : 0, "evolution runs failed the artifact gate");
  } else if (e.promotion == Promotion::Promote) {
    d.decision = "ACCEPT";
  } else {
    const auto tol = inert_tolerance(*e.champion, e.rule);
    const auto delta = e.challenger->par2 - e.champion->par2;
    const bool same_solved = lost_instances(*e.champion, *e.challenger).empty() &&
                             lost_instances(*e.challenger, *e.champion).empty();
    d.decision = same_solved && std::abs(delta) <= tol ? "RETRY" : "REVERT";
    reason("par2_tolerance_sec", tol, "changes within this band count as inert");
  }
  if (e.champion && e.challenger) {
    reason("par2_delta_sec", e.challenger->par2 - e.champion->par2, "challenger minus champion");
    reason("solved_delta", static_cast<double>(e.challenger->solved) - static_cast<double>(e.champion->solved),
           "challenger minus champion");
    reason("lost_instances", static_cast<double>(lost_instances(*e.champion, *e.challenger).size()),
           "champion-solved instances the challenger misses");
  }
  while (d.reasons.size() < 3) reason("touched_slots", static_cast<double>(e.touched_slots.size()), "slots the patch edits");
  if (d.reasons.size() > 6) d.reasons.resize(6);
  d.evidence = ev.str().empty() ? "metrics comparison" : ev.str();
  d.moveset = derive_moves(e);
  return d;
}

std::string clip(const std::string& s, std::size_t max_chars) {
  static const std::string marker = "\n[... truncated]\n";
  if (s.size() <= max_chars) return s;
  if (max_chars <= marker.size()) return marker.substr(0, max_chars);
  return s.substr(0, max_chars - marker.size()) + marker;
}

std::string clip_tail(const std::string& s, std::size_t max_lines, std::size_t max_chars) {
  static const std::string marker = "[... earlier output dropped]\n";
  std::size_t pos = s.size();
  if (!s.empty() && s.back() == '\n') --pos;
  std::size_t lines = 0;
  std::size_t start = 0;
  while (pos > 0) {
    auto nl = s.rfind('\n', pos - 1);
    if (nl == std::string::npos) break;
    if (++lines >= max_lines) {
      start = nl + 1;
      break;
    }
    pos = nl;
  }
  std::string out = s.substr(start);
  bool cut = start > 0;
  if (out.size() + (cut ? marker.size() : 0) > max_chars) {
    auto keep = max_chars > marker.size() ? max_chars - marker.size() : 0;
    out = out.substr(out.size() - std::min(keep, out.size()));
    cut = true;
  }
  return cut ? marker + out : out;
}

namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

const char* instructions(const std::string& role) {
  if (role == "programmer")
    return "You edit a model checker's heuristic code. Change only files of the focus slots. Reply with one ```diff "
           "block holding a unified diff against the files shown, and one ```json block holding a hypothesis_v1 "
           "document (primary_slot, cross_slot_touches, expected_metrics, fallback, rationale).\n";
  return "You judge one challenger against the champion. Reply with exactly one ```json block holding a diagnosis_v1 "
         "document (decision ACCEPT|REVERT|RETRY, 3-6 reasons with metric, value and note, evidence, "
         "hypothesis_eval, moveset).\n";
}

}  // namespace

Prompt assemble_prompt(const PromptInputs& in, const PromptBudgets& b0, bool slim) {
  PromptBudgets b = b0;
  if (slim) {
    b.kb_chars = 0;
    b.log_lines = std::max<std::size_t>(1, b.log_lines / 4);
    b.log_chars /= 4;
    b.metrics_chars /= 4;
    b.diff_chars /= 2;
    b.code_chars /= 2;
    b.max_moves = std::min<std::size_t>(b.max_moves, 3);
  }
  Prompt p;
  p.slim = slim;
  auto add = [&](const std::string& name, const std::string& body) {
    if (body.empty()) return;
    std::string s = "## " + name + "\n" + body;
    if (s.back() != '\n') s += '\n';
    s += '\n';
    p.sections.emplace_back(name, s.size());
    p.text += s;
  };

  add("ROLE", instructions(in.role));
  add("SLOT_FOCUS", join(in.slot_focus, ", "));
  add("PLAN", in.plan);
  add("HYPOTHESIS", in.hypothesis);
  add("DIFF", clip(in.diff, b.diff_chars));
  add("METRICS", in.metrics.is_null() ? "" : clip(in.metrics.dump(1), b.metrics_chars));
  add("BASELINE", in.baseline.is_null() ? "" : clip(in.baseline.dump(1), b.metrics_chars));
  add("DIAGNOSIS", clip(in.diagnosis, b.metrics_chars));
  {
    auto ranked = rank_by_score(in.moves);
    if (ranked.size() > b.max_moves) ranked.resize(b.max_moves);
    json mv = json::array();
    for (const auto& m : ranked) mv.push_back(to_json(m));
    add("MOVESET", ranked.empty() ? "" : mv.dump());
  }
  {
    std::string code;
    std::size_t left = b.code_chars;
    for (const auto& c : in.code) {
      if (left == 0) break;
      auto piece = clip("### " + c.path + "\n" + c.text, left);
      left -= piece.size();
      code += piece;
      if (code.back() != '\n') code += '\n';
    }
    add("CODE", code);
  }
  {
    auto logs = in.logs;
    std::stable_sort(logs.begin(), logs.end(), [](const CaseLog& a, const CaseLog& c) { return a.seconds > c.seconds; });
    auto k = static_cast<std::size_t>(std::ceil(logs.size() * b.top_k_percent / 100.0));
    if (!logs.empty()) k = std::max<std::size_t>(k, 1);
    logs.resize(std::min(k, logs.size()));
    std::string text;
    for (const auto& l : logs) {
      std::ostringstream head;
      head << "### " << l.id << " (" << l.seconds << " s)\n";
      text += head.str() + clip_tail(l.text, b.log_lines, b.log_chars);
      if (text.back() != '\n') text += '\n';
    }
    add("SLOW_CASES", text);
  }
  if (b.kb_chars > 0) {
    static const std::string marker = "\n[... KB truncated]\n";
    std::string kb = in.kb;
    if (kb.size() > b.kb_chars) kb = kb.substr(0, b.kb_chars > marker.size() ? b.kb_chars - marker.size() : 0) + marker;
    add("KB", kb);
  }

  if (p.text.size() > b.total_chars) {
    if (!slim) return assemble_prompt(in, b0, true);
    std::ostringstream msg;
    msg << "prompt of " << p.text.size() << " chars exceeds the budget of " << b.total_chars << " even when slim;";
    for (const auto& [name, n] : p.sections) msg << " " << name << "=" << n;
    throw PromptOverflow(msg.str());
  }
  return p;
}

}  // namespace slotic3::evolve
