#pragma once

#include "slotic3/policy.hpp"

namespace fixture {

inline slotic3::SlotPolicy push_prop() {
  return slotic3::make_policy(slotic3::SlotId::PushProp, "baseline");
}

}  // namespace fixture
