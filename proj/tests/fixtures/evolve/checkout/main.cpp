// Minimal solver checkout for evolution runs: each slot header picks the
// variant used for its slot.
#include "slotic3/check_command.hpp"
#include "slots/ind_gen.hpp"
#include "slots/po_handling.hpp"
#include "slots/pred_gen.hpp"
#include "slots/push_prop.hpp"

int main(int argc, char** argv) {
  slotic3::PolicySet policies;
  policies.set(fixture::po_handling());
  policies.set(fixture::ind_gen());
  policies.set(fixture::pred_gen());
  policies.set(fixture::push_prop());
  slotic3::cli::CheckHooks hooks;
  hooks.shortcut = fixture::shortcut;
  return slotic3::cli::check_main(argc, argv, policies, hooks);
}
