#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slotic3/agent.hpp"
#include "slotic3/bench.hpp"
#include "slotic3/evolve.hpp"
#include "slotic3/patch.hpp"

namespace slotic3::evolve {

/// `slots_v1`: which files belong to which slot, plus admission caps.
struct SlotManifest {
  std::vector<std::string> slots;
  std::map<std::string, std::vector<std::string>> files;
  patch::AdmissionRules rules;

  std::vector<std::string> files_of(const std::vector<std::string>& chosen) const;
  /// Slots owning any of the given files.
  std::vector<std::string> slots_touching(const std::vector<std::string>& paths) const;
};

SlotManifest parse_manifest(const nlohmann::json& j);

struct AgentConfig {
  /// "scripted", "http", or (evaluator only) "rubric".
  std::string kind = "rubric";
  std::filesystem::path transcript;
  std::string endpoint;
  std::string model;
  double timeout_sec = 300;
};

/// Builds the configured agent; nullptr for the rubric evaluator.
std::unique_ptr<Agent> make_agent(const AgentConfig& c);

struct Phase {
  /// "sweep" or "compass_jump".
  std::string mode;
  unsigned rounds = 0;
};

/// `run_config_v1`. Relative paths are resolved against the config file's
/// directory, except `manifest` and `binary`, which live in the checkout.
struct RunConfig {
  std::filesystem::path baseline;
  std::filesystem::path run_dir;
  std::filesystem::path manifest = "slots.json";
  std::string build_command;
  double build_timeout_sec = 1800;
  std::filesystem::path binary;
  std::vector<std::string> solver_args;
  std::vector<std::string> check_args;
  std::vector<std::filesystem::path> evolution_suite;
  std::vector<GateInstance> gate_suite;
  double timeout_sec = 60;
  double gate_timeout_sec = 60;
  unsigned jobs = 1;
  std::vector<Phase> schedule;
  unsigned sweep_patience = 5;
  std::vector<std::string> sweep_order;
  double p_jump = 0.2;
  unsigned jump_size = 2;
  Weights weights;
  JumpBounds bounds;
  PromotionRule promotion;
  std::uint64_t seed = 1;
  PromptBudgets budgets;
  /// A file, or a directory holding `<slot>.md` files and `general.md`.
  std::filesystem::path kb;
  /// Top-level checkout entries ignored by hashing and mirroring.
  std::vector<std::string> exclude{"build", ".git"};
  AgentConfig programmer;
  AgentConfig evaluator;

  unsigned total_rounds() const;
};

/// Throws std::runtime_error naming the offending key.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

/// One line of index.jsonl. Only deterministic fields are kept: timings
/// live in the round's metrics.json.
struct IterationRecord {
  unsigned round = 0;
  std::string mode;
  Scope scope;
  double p_jump = 0;
  std::string patch_sha256;
  std::vector<std::string> touched;
  bool admitted = false;
  std::vector<std::string> admission_errors;
  bool build_ok = false;
  bool gate_passed = false;
  std::vector<std::string> gate_reasons;
  std::vector<std::string> solved;
  std::size_t timeouts = 0;
  /// PROMOTE, REVERT, or BASELINE for round 0.
  std::string decision;
  /// Evaluator decision: ACCEPT, REVERT or RETRY.
  std::string diagnosis;
  bool evaluator_fallback = false;
  std::string champion_hash;
  bool rollback_ok = true;
  std::string error;
};

nlohmann::json to_json(const IterationRecord& r);

class Orchestrator {
 public:
  /// A null evaluator selects the rubric.
  Orchestrator(RunConfig cfg, std::unique_ptr<Agent> programmer, std::unique_ptr<Agent> evaluator);

  /// Fresh start evaluates the baseline as round 0; resume reloads
  /// state.json and checks the champion tree against its recorded hash.
  void start(bool resume);
  bool finished() const { return round_ >= cfg_.total_rounds(); }
  IterationRecord step();
  /// Runs until the schedule ends or `max_rounds` more rounds have run.
  std::vector<IterationRecord> run(std::optional<unsigned> max_rounds = std::nullopt);

  unsigned round() const { return round_; }
  const std::string& champion_hash() const { return champion_hash_; }
  const PolicyState& policy() const { return policy_; }
  const SlotManifest& manifest() const { return manifest_; }

  /// Progress lines (stderr in the CLI).
  std::function<void(const std::string&)> log = [](const std::string&) {};

 private:
  struct Round;

  std::filesystem::path round_dir(unsigned r) const;
  std::filesystem::path champion_dir() const { return cfg_.run_dir / "champion"; }
  std::filesystem::path work_dir() const { return cfg_.run_dir / "work"; }
  std::string mode_of(unsigned r) const;
  Scope choose_scope(const std::string& mode);
  std::optional<Proposal> propose(const Scope& scope, const std::string& mode, Round& rd);
  Diagnosis diagnose(const Evaluation& ev, const Round& rd, bool& fallback);
  std::string build_and_stage(Round& rd);
  bench::SuiteOptions suite_options(const std::filesystem::path& binary, double timeout,
                                    const std::filesystem::path& work) const;
  std::vector<CaseLog> case_logs(const bench::BenchReport& r) const;
  std::string kb_for(const std::vector<std::string>& slots) const;
  void save_state() const;
  void load_state();
  void append_index(const IterationRecord& rec) const;

  RunConfig cfg_;
  SlotManifest manifest_;
  std::unique_ptr<Agent> programmer_;
  std::unique_ptr<Agent> evaluator_;
  PolicyState policy_;
  unsigned round_ = 0;
  unsigned champion_round_ = 0;
  std::string champion_hash_;
  std::filesystem::path champion_binary_;
  std::optional<GatedReport> champion_;
  MoveSet moves_;
  nlohmann::json last_diagnosis_;
  std::size_t sweep_index_ = 0;
  unsigned sweep_misses_ = 0;
};

struct ReplayResult {
  bool ok = false;
  std::string expected_hash;
  std::string rebuilt_hash;
  bool build_ok = false;
  bool gate_passed = false;
  std::vector<std::string> reasons;
  std::vector<unsigned> promoted_rounds;
};

/// Rebuilds the champion in `scratch` from the baseline and the recorded
/// diffs of promoted rounds alone, then builds it and runs the gate suite.
ReplayResult replay_champion(const RunConfig& cfg, const std::filesystem::path& scratch);

}  // namespace slotic3::evolve
