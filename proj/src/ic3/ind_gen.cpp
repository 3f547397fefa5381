// ind_gen slot: generalizing a blocked cube into a lemma.
#include <cmath>

#include "slotic3/ic3.hpp"

namespace slotic3::ic3 {

Clause Engine::ind_gen(const Cube& s, std::size_t i) {
  Cube core;
  if (has_predecessor(i - 1, s, nullptr, &core))
    throw std::invalid_argument("ind_gen: cube " + s.str() + " has a predecessor in frame " + std::to_string(i - 1));
  return ind_gen_from(s, i, core);
}

Clause Engine::ind_gen_from(const Cube& s, std::size_t i, const Cube& core) {
  const auto& policy = opts_.policies.ind_gen;
  Clause result;
  if (policy.variant == "none") {
    result = negate(s);
  } else if (policy.variant == "core_only") {
    result = negate(keep_initiation(core, s));
  } else if (policy.variant == "down") {
    Cube cube = policy.param("use_core") != 0 ? keep_initiation(core, s) : s;
    auto budget = static_cast<std::size_t>(std::ceil(policy.param("budget_factor") * static_cast<double>(s.size())));
    std::size_t pos = 0;
    while (pos < cube.size() && budget > 0) {
      auto lit = cube[pos];
      auto cand = cube.without(lit);
      if (cand.empty() || intersects_init(cand)) {
        ++pos;
        continue;
      }
      --budget;
      ++stats_.indgen_queries;
      Cube cand_core;
      if (relatively_inductive(negate(cand), i, &cand_core)) {
        auto shrunk = keep_initiation(cand_core, cand);
        stats_.indgen_dropped += cube.size() - shrunk.size();
        // Literals before `pos` were already tried; resume at the first
        // survivor past them.
        std::size_t next = 0;
        while (next < shrunk.size() && shrunk[next] < lit) ++next;
        cube = std::move(shrunk);
        pos = next;
      } else {
        ++pos;
      }
    }
    result = negate(cube);
  } else {
    throw PolicyError("unsupported ind_gen variant " + policy.variant);
  }
  if (opts_.verify_lemmas) verify_lemma(result, i);
  return result;
}

}  // namespace slotic3::ic3
