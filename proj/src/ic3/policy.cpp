#include "slotic3/policy.hpp"

#include <charconv>
#include <sstream>

namespace slotic3 {

std::string_view slot_name(SlotId s) {
  switch (s) {
    case SlotId::PoHandling: return "po_handling";
    case SlotId::IndGen: return "ind_gen";
    case SlotId::PredGen: return "pred_gen";
    case SlotId::PushProp: return "push_prop";
  }
  return "?";
}

std::optional<SlotId> slot_from_name(std::string_view name) {
  for (auto s : all_slots())
    if (slot_name(s) == name) return s;
  return std::nullopt;
}

const std::vector<SlotId>& all_slots() {
  static const std::vector<SlotId> slots{SlotId::PoHandling, SlotId::IndGen, SlotId::PredGen, SlotId::PushProp};
  return slots;
}

const std::vector<VariantSpec>& variants(SlotId slot) {
  static const std::vector<VariantSpec> po{
      {"best_first", "min-heap on (frame, depth + age_weight*age, cube size), insertion-order tiebreak",
       {{"age_weight", 0.0}}},
      {"min_frame_then_size", "min-heap on (frame, cube size), insertion-order tiebreak", {}},
      {"dfs", "most recently inserted obligation first", {}},
  };
  static const std::vector<VariantSpec> ind{
      {"down", "core-seeded single down pass, one SAT call per candidate drop",
       {{"budget_factor", 3.0}, {"use_core", 1.0}}},
      {"core_only", "negation of the blockability core, no literal dropping", {}},
      {"none", "negation of the full cube", {}},
  };
  static const std::vector<VariantSpec> pred{
      {"lift", "SAT-based lifting of the predecessor state", {{"reverse", 0.0}}},
      {"none", "full latch assignment of the predecessor", {}},
  };
  static const std::vector<VariantSpec> push{
      {"baseline", "push every clause, simplify every round", {}},
      {"gated_simplify", "simplify only after a productive round or at a checkpoint", {{"checkpoint", 4.0}}},
      {"stall_skip", "gated simplify; skip frames whose stall streak reached the limit",
       {{"checkpoint", 4.0}, {"limit", 3.0}}},
      {"adaptive_budget", "stall_skip plus per-frame push budgets adapted to stall/success history",
       {{"checkpoint", 4.0}, {"limit", 3.0}, {"base", 8.0}, {"cap", 32.0}, {"floor", 1.0}, {"early_cut", 3.0}}},
  };
  switch (slot) {
    case SlotId::PoHandling: return po;
    case SlotId::IndGen: return ind;
    case SlotId::PredGen: return pred;
    case SlotId::PushProp: return push;
  }
  return po;
}

double SlotPolicy::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end())
    throw PolicyError("policy " + std::string(slot_name(slot)) + "=" + variant + " has no parameter " + name);
  return it->second;
}

std::string SlotPolicy::str() const {
  std::ostringstream os;
  os << slot_name(slot) << '=' << variant;
  for (auto& [k, v] : params) os << ',' << k << '=' << v;
  return os.str();
}

SlotPolicy make_policy(SlotId slot, std::string_view variant, const std::map<std::string, double>& overrides) {
  for (const auto& spec : variants(slot)) {
    if (spec.name != variant) continue;
    SlotPolicy p{slot, spec.name, spec.defaults};
    for (auto& [k, v] : overrides) {
      if (!spec.defaults.count(k))
        throw PolicyError("unknown parameter '" + k + "' for " + std::string(slot_name(slot)) + "=" + spec.name);
      p.params[k] = v;
    }
    return p;
  }
  throw PolicyError("unknown variant '" + std::string(variant) + "' for slot " + std::string(slot_name(slot)));
}

SlotPolicy parse_policy(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t p = 0;
  while (true) {
    auto comma = spec.find(',', p);
    parts.push_back(spec.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
    if (comma == std::string_view::npos) break;
    p = comma + 1;
  }
  auto split_eq = [&](std::string_view kv) {
    auto eq = kv.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == kv.size())
      throw PolicyError("malformed policy '" + std::string(spec) + "': expected key=value");
    return std::pair{kv.substr(0, eq), kv.substr(eq + 1)};
  };
  auto [slot_str, variant] = split_eq(parts[0]);
  auto slot = slot_from_name(slot_str);
  if (!slot) throw PolicyError("unknown slot '" + std::string(slot_str) + "'");
  std::map<std::string, double> overrides;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    auto [k, v] = split_eq(parts[i]);
    double x = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw PolicyError("parameter " + std::string(k) + " needs a numeric value, got '" + std::string(v) + "'");
    overrides[std::string(k)] = x;
  }
  return make_policy(*slot, variant, overrides);
}

void PolicySet::set(SlotPolicy p) {
  switch (p.slot) {
    case SlotId::PoHandling: po_handling = std::move(p); break;
    case SlotId::IndGen: ind_gen = std::move(p); break;
    case SlotId::PredGen: pred_gen = std::move(p); break;
    case SlotId::PushProp: push_prop = std::move(p); break;
  }
}

const SlotPolicy& PolicySet::get(SlotId s) const {
  switch (s) {
    case SlotId::PoHandling: return po_handling;
    case SlotId::IndGen: return ind_gen;
    case SlotId::PredGen: return pred_gen;
    case SlotId::PushProp: return push_prop;
  }
  return po_handling;
}

std::string PolicySet::str() const {
  return po_handling.str() + ' ' + ind_gen.str() + ' ' + pred_gen.str() + ' ' + push_prop.str();
}

}  // namespace slotic3
