#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slotic3 {

/// Heuristic touchpoints of the checker that a policy variant (or an
/// evolution patch) may change without touching proof logic.
enum class SlotId { PoHandling, IndGen, PredGen, PushProp };

std::string_view slot_name(SlotId s);
std::optional<SlotId> slot_from_name(std::string_view name);
const std::vector<SlotId>& all_slots();

class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct VariantSpec {
  std::string name;
  std::string summary;
  std::map<std::string, double> defaults;
};

/// Registered variants per slot, default variant first.
const std::vector<VariantSpec>& variants(SlotId slot);

struct SlotPolicy {
  SlotId slot = SlotId::PoHandling;
  std::string variant;
  std::map<std::string, double> params;

  double param(const std::string& name) const;
  std::string str() const;
  bool operator==(const SlotPolicy&) const = default;
};

/// Builds a policy, filling defaults; throws PolicyError for an unknown
/// variant or parameter.
SlotPolicy make_policy(SlotId slot, std::string_view variant, const std::map<std::string, double>& overrides = {});

/// Parses `slot=variant[,key=value...]`.
SlotPolicy parse_policy(std::string_view spec);

struct PolicySet {
  SlotPolicy po_handling = make_policy(SlotId::PoHandling, "best_first");
  SlotPolicy ind_gen = make_policy(SlotId::IndGen, "down");
  SlotPolicy pred_gen = make_policy(SlotId::PredGen, "lift");
  SlotPolicy push_prop = make_policy(SlotId::PushProp, "baseline");

  void set(SlotPolicy p);
  const SlotPolicy& get(SlotId s) const;
  std::string str() const;
};

}  // namespace slotic3
