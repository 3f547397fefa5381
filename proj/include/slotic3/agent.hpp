#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slotic3/bench.hpp"
#include "slotic3/evolve.hpp"
#include "slotic3/patch.hpp"

namespace slotic3::evolve {

/// Transport failure or an exhausted transcript.
class AgentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A text-in, text-out model endpoint. `role` is "programmer" or
/// "evaluator".
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string complete(const std::string& role, const std::string& prompt) = 0;
  /// Opaque position for resuming a run; empty for stateless agents.
  virtual nlohmann::json cursor() const { return nullptr; }
  virtual void restore(const nlohmann::json&) {}
};

/// Replays a `transcript_v1` file. An entry is chosen by (role, prompt
/// hash); when no unused entry matches the hash, the next unused entry of
/// that role is taken, so transcripts stay valid when prompts embed timings.
class ScriptedAgent : public Agent {
 public:
  struct Entry {
    std::string role;
    std::string prompt_sha256;
    std::string response;
  };

  explicit ScriptedAgent(std::vector<Entry> entries) : entries_(std::move(entries)), used_(entries_.size(), false) {}
  static ScriptedAgent from_json(const nlohmann::json& j);
  static ScriptedAgent load(const std::filesystem::path& p);

  std::string complete(const std::string& role, const std::string& prompt) override;
  nlohmann::json cursor() const override;
  void restore(const nlohmann::json& c) override;

  /// Prompts seen so far, in order, for inspection.
  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<Entry> entries_;
  std::vector<bool> used_;
  std::vector<std::string> prompts_;
};

/// JSON over HTTP: POST {"model", "role", "prompt"} to the endpoint and
/// read {"content": "..."} back.
class HttpAgent : public Agent {
 public:
  HttpAgent(std::string endpoint, std::string model, double timeout_sec);
  std::string complete(const std::string& role, const std::string& prompt) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string model_;
  double timeout_sec_;
};

/// Contents of the single fenced block tagged `lang`. Throws SchemaError when
/// there is none or more than one.
std::string fenced_block(const std::string& text, const std::string& lang);

/// Repository-root file a diff may create to carry the hypothesis.
inline constexpr const char* kHypothesisFile = "Hypothesis.json";

struct Proposal {
  std::string diff;
  Hypothesis hypothesis;
};

/// A programmer reply: one ```diff block, and the Hypothesis document either
/// as a Hypothesis.json created by that diff or in one ```json block.
Proposal parse_proposal(const std::string& reply, const std::vector<std::string>& slots);

/// The patch minus any Hypothesis.json entry.
patch::Patch without_hypothesis(patch::Patch p);

/// An evaluator reply: exactly one ```json block holding diagnosis_v1.
Diagnosis parse_diagnosis_reply(const std::string& reply, const std::vector<std::string>& slots, bool fatal_build);

/// Everything the built-in rubric evaluator looks at.
struct Evaluation {
  bool admitted = true;
  std::vector<std::string> admission_errors;
  bool build_ok = true;
  bool gate_passed = true;
  std::vector<std::string> gate_reasons;
  const bench::BenchReport* champion = nullptr;
  const bench::BenchReport* challenger = nullptr;
  std::optional<Promotion> promotion;
  PromotionRule rule;
  std::vector<std::string> touched_slots;
  std::vector<std::string> slots;
};

/// PAR2 band within which a change counts as inert.
double inert_tolerance(const bench::BenchReport& champion, const PromotionRule& rule);

/// Deterministic evaluator: REVERT on rejection, build or gate failure or
/// any failed run; ACCEPT on promotion; RETRY when the solved set is
/// unchanged and PAR2 moved less than the inert tolerance; REVERT otherwise.
/// The MoveSet is derived from the aggregated HYP counters.
Diagnosis rubric_diagnosis(const Evaluation& e);

struct CaseLog {
  std::string id;
  double seconds = 0;
  std::string text;
};

struct CodeSnippet {
  std::string path;
  std::string text;
};

struct PromptBudgets {
  std::size_t total_chars = 32000;
  std::size_t diff_chars = 6000;
  std::size_t code_chars = 8000;
  std::size_t metrics_chars = 4000;
  double top_k_percent = 10;
  std::size_t log_lines = 40;
  std::size_t log_chars = 2000;
  std::size_t kb_chars = 4000;
  std::size_t max_moves = 8;
};

struct PromptInputs {
  std::string role;
  std::vector<std::string> slot_focus;
  std::string plan;
  std::string diff;
  nlohmann::json metrics;
  nlohmann::json baseline;
  std::string hypothesis;
  std::string diagnosis;
  MoveSet moves;
  std::vector<CodeSnippet> code;
  std::vector<CaseLog> logs;
  std::string kb;
};

struct Prompt {
  std::string text;
  bool slim = false;
  /// (section, characters) in assembly order.
  std::vector<std::pair<std::string, std::size_t>> sections;
};

class PromptOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Core fields, budgeted code snippets, logs of the top-k% slowest cases,
/// then the KB, each clipped to its budget. Falls back to the slim prompt
/// (no KB, shorter logs, metrics, moves and code) when the total exceeds the
/// budget; throws PromptOverflow if even that does not fit.
Prompt assemble_prompt(const PromptInputs& in, const PromptBudgets& b, bool slim = false);

/// Keeps the first `max_chars` characters, marking the cut.
std::string clip(const std::string& s, std::size_t max_chars);
/// Keeps the last `max_lines` lines, then clips to `max_chars` from the end.
std::string clip_tail(const std::string& s, std::size_t max_lines, std::size_t max_chars);

}  // namespace slotic3::evolve
