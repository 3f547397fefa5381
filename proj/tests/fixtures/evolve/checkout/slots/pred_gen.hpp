#pragma once

#include <optional>

#include "slotic3/ic3.hpp"
#include "slotic3/policy.hpp"

namespace fixture {

inline slotic3::SlotPolicy pred_gen() {
  return slotic3::make_policy(slotic3::SlotId::PredGen, "none");
}

// A verdict returned here skips the engine.
inline std::optional<slotic3::ic3::Verdict> shortcut(const slotic3::TransitionSystem&) {
  return std::nullopt;
}

}  // namespace fixture
