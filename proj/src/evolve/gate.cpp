#include "slotic3/evolve.hpp"

namespace slotic3::evolve {

GateOutcome hard_gate(const std::vector<GateInstance>& suite, const bench::SuiteOptions& opts) {
  std::vector<std::filesystem::path> paths;
  std::map<std::string, std::string> expect;
  for (const auto& g : suite) {
    paths.push_back(g.path);
    expect[bench::instance_id(g.path)] = g.expect;
  }
  GateOutcome out;
  out.report = bench::run_suite(paths, opts);
  for (const auto& r : out.report.runs) {
    if (!r.ok) {
      std::string why = r.error;
      if (r.gate && !r.gate->passed) why = r.gate->reason;
      out.reasons.push_back(r.id + ": " + (why.empty() ? r.verdict : why));
      continue;
    }
    const auto& e = expect[r.id];
    if (r.solved() && !e.empty() && r.verdict != e)
      out.reasons.push_back(r.id + ": answered " + r.verdict + ", expected " + e);
  }
  out.passed = out.reasons.empty();
  return out;
}

}  // namespace slotic3::evolve
