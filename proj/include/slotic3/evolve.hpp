#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slotic3/bench.hpp"

namespace slotic3::evolve {

/// Raised when an agent document does not match its schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Move {
  std::string slot;
  std::string direction;
  double conf = 0;
  double risk = 0;
  double cost = 0;
  bool operator==(const Move&) const = default;
};

using MoveSet = std::vector<Move>;

struct Weights {
  double conf = 1.0;
  double risk = 0.5;
  double cost = 0.25;
};

double score_move(const Move& m, const Weights& w = {});

/// Stable sort by descending score.
MoveSet rank_by_score(MoveSet moves, const Weights& w = {});

/// First move of each distinct slot in ranked order, at most `j` of them.
MoveSet top_distinct_slots(const MoveSet& ranked, unsigned j);

/// One round as seen by the search policy.
struct RoundOutcome {
  bool promoted = false;
  /// Challenger PAR2 minus champion PAR2 (negative is better); 0 when the
  /// challenger never reached benchmarking.
  double par2_delta = 0;
  bool operator==(const RoundOutcome&) const = default;
};

struct JumpBounds {
  double p_min = 0.05;
  double p_max = 0.6;
  double shrink = 0.8;
  double grow = 0.1;
  unsigned steady_streak = 2;
  unsigned stagnant_streak = 3;
};

/// Shrinks p after a run of promotions, grows it after a run of
/// non-promotions, clamped to the bounds.
double adjust_jump(double p, const std::vector<RoundOutcome>& history, const JumpBounds& b = {});

/// True when the sign of the PAR2 delta flipped in at least 2 of the last 4
/// rounds.
bool volatile_history(const std::vector<RoundOutcome>& history);

/// Highest-score move; with a volatile history, restricted to moves whose
/// risk does not exceed the median risk.
Move select_best(const MoveSet& ranked, const std::vector<RoundOutcome>& history);

/// Deterministic RNG for the search policy (explicit transforms so results
/// do not depend on the standard library's distributions).
class PolicyRng {
 public:
  explicit PolicyRng(std::uint64_t seed = 1) : eng_(seed) {}
  double uniform();
  std::size_t index(std::size_t n);
  std::string state() const;
  void restore(const std::string& s);

 private:
  std::mt19937_64 eng_;
};

struct PolicyState {
  double p_jump = 0.2;
  unsigned jump_size = 2;
  Weights weights;
  JumpBounds bounds;
  std::vector<RoundOutcome> history;
  PolicyRng rng;
};

struct Scope {
  std::vector<std::string> allowed;
  MoveSet guidance;
  bool jump = false;
  bool operator==(const Scope&) const = default;
};

/// One step of the slot-selection policy. Updates state.p_jump.
Scope compass_jump(const std::vector<std::string>& slots, const MoveSet& moves, PolicyState& state);

struct Hypothesis {
  std::string primary_slot;
  std::vector<std::string> cross_slot_touches;
  /// metric name -> "decrease" | "increase" | "unchanged"
  std::map<std::string, std::string> expected_metrics;
  std::string fallback;
  std::string rationale;
};

struct Finding {
  std::string metric;
  double value = 0;
  std::string note;
};

struct Diagnosis {
  std::string decision;  // ACCEPT, REVERT or RETRY
  std::vector<Finding> reasons;
  std::string evidence;
  std::string hypothesis_eval;
  MoveSet moveset;
};

/// Validation against hypothesis_v1 / diagnosis_v1. Move numeric fields are
/// clamped to [0,1]; unknown slots are rejected.
Hypothesis parse_hypothesis(const nlohmann::json& j, const std::vector<std::string>& slots);
Diagnosis parse_diagnosis(const nlohmann::json& j, const std::vector<std::string>& slots, bool fatal_build = false);
nlohmann::json to_json(const Hypothesis& h);
nlohmann::json to_json(const Diagnosis& d);
nlohmann::json to_json(const Move& m);

enum class Promotion { Promote, Revert };

struct PromotionRule {
  /// Champion-solved instances the challenger may lose.
  std::size_t regression_budget = 1;
  /// Required PAR2 gain in seconds (0: any strict gain).
  double min_improvement_sec = 0;
};

/// A gate-suite entry; `expect` is SAFE, UNSAFE or empty (unknown).
struct GateInstance {
  std::filesystem::path path;
  std::string expect;
};

struct GateOutcome {
  bool passed = false;
  std::vector<std::string> reasons;
  bench::BenchReport report;
};

/// Runs the gate suite with the given solver. Passes iff no run failed
/// (missing artifact, check/replay failure, inconsistent exit code, crash)
/// and no solved verdict contradicts a known expectation.
GateOutcome hard_gate(const std::vector<GateInstance>& suite, const bench::SuiteOptions& opts);

/// Evolution-suite report that passed both the hard gate and its own
/// per-run artifact gate. Only these reach the promotion rule.
class GatedReport {
 public:
  const bench::BenchReport& report() const { return report_; }

 private:
  friend std::optional<GatedReport> admit(bench::BenchReport report, const GateOutcome& gate);
  explicit GatedReport(bench::BenchReport r) : report_(std::move(r)) {}
  bench::BenchReport report_;
};

std::optional<GatedReport> admit(bench::BenchReport report, const GateOutcome& gate);

/// PROMOTE iff PAR2 strictly improves (by more than min_improvement_sec),
/// solved does not drop, and at most `regression_budget` champion-solved
/// instances are lost. Throws std::invalid_argument for mismatched suites.
Promotion promote(const GatedReport& champion, const GatedReport& challenger, const PromotionRule& rule);

/// Instances solved by `a` but not by `b`.
std::vector<std::string> lost_instances(const bench::BenchReport& a, const bench::BenchReport& b);

}  // namespace slotic3::evolve
