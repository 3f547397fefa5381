#pragma once

#include "slotic3/policy.hpp"

namespace fixture {

inline slotic3::SlotPolicy ind_gen() {
  return slotic3::make_policy(slotic3::SlotId::IndGen, "none");
}

}  // namespace fixture
