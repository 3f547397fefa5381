// hypothesis_v1 / diagnosis_v1 ingest and the promotion rule.
#include <algorithm>
#include <set>

#include "slotic3/evolve.hpp"

namespace slotic3::evolve {

using nlohmann::json;

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
  return *it;
}

std::string need_string(const json& j, const char* key, const std::string& where, bool nonempty = true) {
  const auto& v = need(j, key, where);
  if (!v.is_string()) throw SchemaError(where + "." + key + ": expected a string");
  auto s = v.get<std::string>();
  if (nonempty && s.empty()) throw SchemaError(where + "." + key + ": must not be empty");
  return s;
}

std::string opt_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return {};
  if (!j[key].is_string()) throw SchemaError(where + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

double need_number(const json& j, const char* key, const std::string& where) {
  const auto& v = need(j, key, where);
  if (!v.is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return v.get<double>();
}

void check_slot(const std::string& s, const std::vector<std::string>& slots, const std::string& where) {
  if (std::find(slots.begin(), slots.end(), s) == slots.end()) throw SchemaError(where + ": unknown slot '" + s + "'");
}

Move parse_move(const json& j, const std::vector<std::string>& slots, const std::string& where) {
  Move m;
  m.slot = need_string(j, "slot", where);
  check_slot(m.slot, slots, where + ".slot");
  m.direction = need_string(j, "direction", where);
  m.conf = std::clamp(need_number(j, "conf", where), 0.0, 1.0);
  m.risk = std::clamp(need_number(j, "risk", where), 0.0, 1.0);
  m.cost = std::clamp(need_number(j, "cost", where), 0.0, 1.0);
  return m;
}

}  // namespace

Hypothesis parse_hypothesis(const json& j, const std::vector<std::string>& slots) {
  const std::string w = "hypothesis";
  if (need_string(j, "schema", w) != "hypothesis_v1") throw SchemaError("hypothesis: schema must be hypothesis_v1");
  Hypothesis h;
  h.primary_slot = need_string(j, "primary_slot", w);
  check_slot(h.primary_slot, slots, w + ".primary_slot");
  if (j.contains("cross_slot_touches")) {
    const auto& c = j["cross_slot_touches"];
    if (!c.is_array()) throw SchemaError("hypothesis.cross_slot_touches: expected an array");
    for (const auto& s : c) {
      if (!s.is_string()) throw SchemaError("hypothesis.cross_slot_touches: expected strings");
      check_slot(s.get<std::string>(), slots, w + ".cross_slot_touches");
      h.cross_slot_touches.push_back(s.get<std::string>());
    }
  }
  const auto& em = need(j, "expected_metrics", w);
  if (!em.is_object()) throw SchemaError("hypothesis.expected_metrics: expected an object");
  for (const auto& [k, v] : em.items()) {
    if (!v.is_string()) throw SchemaError("hypothesis.expected_metrics." + k + ": expected a string");
    auto d = v.get<std::string>();
    if (d != "decrease" && d != "increase" && d != "unchanged")
      throw SchemaError("hypothesis.expected_metrics." + k + ": must be decrease, increase or unchanged");
    h.expected_metrics[k] = d;
  }
  h.fallback = need_string(j, "fallback", w);
  h.rationale = opt_string(j, "rationale", w);
  return h;
}

Diagnosis parse_diagnosis(const json& j, const std::vector<std::string>& slots, bool fatal_build) {
  const std::string w = "diagnosis";
  if (need_string(j, "schema", w) != "diagnosis_v1") throw SchemaError("diagnosis: schema must be diagnosis_v1");
  Diagnosis d;
  d.decision = need_string(j, "decision", w);
  if (d.decision != "ACCEPT" && d.decision != "REVERT" && d.decision != "RETRY")
    throw SchemaError("diagnosis.decision: must be ACCEPT, REVERT or RETRY");
  const auto& reasons = need(j, "reasons", w);
  if (!reasons.is_array() || reasons.size() < 3 || reasons.size() > 6)
    throw SchemaError("diagnosis.reasons: expected 3-6 numeric findings");
  for (std::size_t i = 0; i < reasons.size(); ++i) {
    auto wi = w + ".reasons[" + std::to_string(i) + "]";
    d.reasons.push_back({need_string(reasons[i], "metric", wi), need_number(reasons[i], "value", wi),
                         opt_string(reasons[i], "note", wi)});
  }
  d.evidence = need_string(j, "evidence", w);
  d.hypothesis_eval = opt_string(j, "hypothesis_eval", w);
  const auto& ms = need(j, "moveset", w);
  if (!ms.is_array()) throw SchemaError("diagnosis.moveset: expected an array");
  for (std::size_t i = 0; i < ms.size(); ++i)
    d.moveset.push_back(parse_move(ms[i], slots, w + ".moveset[" + std::to_string(i) + "]"));
  if (d.moveset.empty() && !fatal_build) throw SchemaError("diagnosis.moveset: must not be empty");
  return d;
}

json to_json(const Move& m) {
  return {{"slot", m.slot}, {"direction", m.direction}, {"conf", m.conf}, {"risk", m.risk}, {"cost", m.cost}};
}

json to_json(const Hypothesis& h) {
  return {{"schema", "hypothesis_v1"},       {"primary_slot", h.primary_slot},
          {"cross_slot_touches", h.cross_slot_touches}, {"expected_metrics", h.expected_metrics},
          {"fallback", h.fallback},          {"rationale", h.rationale}};
}

json to_json(const Diagnosis& d) {
  json reasons = json::array(), moves = json::array();
  for (const auto& f : d.reasons) reasons.push_back({{"metric", f.metric}, {"value", f.value}, {"note", f.note}});
  for (const auto& m : d.moveset) moves.push_back(to_json(m));
  return {{"schema", "diagnosis_v1"}, {"decision", d.decision},
          {"reasons", reasons},       {"evidence", d.evidence},
          {"hypothesis_eval", d.hypothesis_eval}, {"moveset", moves}};
}

std::vector<std::string> lost_instances(const bench::BenchReport& a, const bench::BenchReport& b) {
  std::vector<std::string> lost;
  for (const auto& r : a.runs) {
    if (!r.solved()) continue;
    const auto* o = b.find(r.id);
    if (!o || !o->solved()) lost.push_back(r.id);
  }
  return lost;
}

std::optional<GatedReport> admit(bench::BenchReport report, const GateOutcome& gate) {
  if (!gate.passed || !report.all_ok()) return std::nullopt;
  return GatedReport(std::move(report));
}

Promotion promote(const GatedReport& champion_in, const GatedReport& challenger_in, const PromotionRule& rule) {
  const auto& champion = champion_in.report();
  const auto& challenger = challenger_in.report();
  std::set<std::string> a, b;
  for (const auto& r : champion.runs) a.insert(r.id);
  for (const auto& r : challenger.runs) b.insert(r.id);
  if (a != b || champion.timeout != challenger.timeout)
    throw std::invalid_argument("promote: reports cover different suites");
  if (!(challenger.par2 < champion.par2 - rule.min_improvement_sec)) return Promotion::Revert;
  if (challenger.solved < champion.solved) return Promotion::Revert;
  if (lost_instances(champion, challenger).size() > rule.regression_budget) return Promotion::Revert;
  return Promotion::Promote;
}

}  // namespace slotic3::evolve
