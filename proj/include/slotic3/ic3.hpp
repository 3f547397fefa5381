#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slotic3/certify.hpp"
#include "slotic3/cube.hpp"
#include "slotic3/encode.hpp"
#include "slotic3/policy.hpp"
#include "slotic3/sat.hpp"

namespace slotic3::ic3 {

struct ProofObligation {
  Cube cube;
  std::size_t frame = 0;
  /// Predecessor hops from the CTI this obligation descends from.
  std::size_t depth = 0;
  /// Number of times this obligation was re-inserted.
  std::size_t age = 0;
  /// Insertion sequence number, assigned by the queue.
  std::uint64_t seq = 0;
  /// Index into the engine's trace nodes (for counterexample replay).
  std::size_t node = 0;
};

/// Worklist of proof obligations ordered by the po_handling policy.
class ObligationQueue {
 public:
  explicit ObligationQueue(SlotPolicy policy);

  void push(ProofObligation ob);
  /// Removes and returns one obligation; deterministic given the contents
  /// and the policy.
  ProofObligation pop();
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  void clear() { heap_.clear(); }

 private:
  struct Entry {
    double k0, k1, k2;
    std::uint64_t k3;
    ProofObligation ob;
  };
  static bool after(const Entry& a, const Entry& b);

  SlotPolicy policy_;
  std::vector<Entry> heap_;
  std::uint64_t next_seq_ = 0;
};

ProofObligation select_obligation(ObligationQueue& q);

/// Instrumentation counters, printed as `. HYP <key>: <value>`.
struct Counters {
  std::uint64_t sat_calls = 0;
  std::uint64_t ctis = 0;
  std::uint64_t obligations = 0;
  std::uint64_t stale_obligations = 0;
  std::uint64_t predecessors = 0;
  std::uint64_t lemmas = 0;
  std::uint64_t lemma_literals = 0;
  std::uint64_t indgen_queries = 0;
  std::uint64_t indgen_dropped = 0;
  std::uint64_t lift_queries = 0;
  std::uint64_t push_rounds = 0;
  std::uint64_t push_attempts = 0;
  std::uint64_t push_successes = 0;
  std::uint64_t push_frames_skipped = 0;
  std::uint64_t push_early_cuts = 0;
  std::uint64_t simplify_calls = 0;
  std::uint64_t subsumed = 0;
  std::uint64_t frames = 0;
  double seconds = 0;

  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Per-frame push bookkeeping used by the push_prop policies.
struct HeuristicState {
  double push_success_rate = 0;
  std::vector<unsigned> stall_streak;
  std::vector<unsigned> push_budget;
  /// Push queries issued per frame in the most recent round.
  std::vector<unsigned> last_round_queries;
  std::size_t round = 0;
  std::size_t rounds_since_simplify = 0;
  /// Round in which each clause last failed to move forward.
  std::map<Clause, std::size_t> last_failure;
};

struct CheckOptions {
  std::optional<double> timeout_sec;
  PolicySet policies;
  /// Re-check initiation and relative inductiveness of every lemma.
  bool verify_lemmas = false;
};

enum class Result { Safe, Unsafe, Timeout };

std::string_view result_name(Result r);

struct Verdict {
  Result result = Result::Timeout;
  std::optional<certify::Certificate> certificate;
  std::optional<certify::Witness> witness;
  Counters stats;
};

/// IC3 over one TransitionSystem. One long-lived solver holds T and every
/// lemma guarded by its level's activation literal; a second holds only T
/// and is used for lifting. I is a cube of unit literals, so queries
/// against I alone are answered syntactically.
class Engine {
 public:
  explicit Engine(const TransitionSystem& ts, CheckOptions opts = {});

  Verdict check();

  /// Adds (s, k) to the queue and discharges it.
  bool block_one(const Cube& s, std::size_t k);
  bool block_proof_obligations();
  Cube pred_gen(const sat::SolveOutcome& model, std::size_t j, const Cube& s);
  Clause ind_gen(const Cube& s, std::size_t i);
  void push_clauses(std::size_t k);
  /// Smallest i in [1, k) with F_i = F_{i+1}.
  std::optional<std::size_t> fixpoint() const;

  std::size_t top() const { return frames_.size() - 1; }
  void extend();
  /// Adds c to F_1..F_level.
  void add_lemma(const Clause& c, std::size_t level);
  /// Clauses of F_i (i >= 1): every clause stored at a level >= i.
  std::vector<Clause> frame(std::size_t i) const;
  /// Clauses stored at exactly level i.
  const std::vector<Clause>& level(std::size_t i) const { return frames_.at(i); }

  /// F_i and s is satisfiable (F_0 = I).
  bool frame_intersects(std::size_t i, const Cube& s);
  /// F_i and T and s' is satisfiable; fills `model` when SAT and `core`
  /// (literals of s whose primes were needed) when UNSAT.
  bool has_predecessor(std::size_t i, const Cube& s, sat::SolveOutcome* model = nullptr, Cube* core = nullptr);
  bool initiation(const Clause& c);
  /// F_{i-1} and c and T and not c' is unsatisfiable.
  bool relatively_inductive(const Clause& c, std::size_t i, Cube* core = nullptr);
  bool intersects_init(const Cube& s);

  /// Cubes from the failing obligation to the CTI, after a failed block.
  std::vector<Cube> counterexample_chain() const;
  certify::Certificate certificate(std::size_t i) const;

  const Counters& stats() const { return stats_; }
  const HeuristicState& heuristic_state() const { return heur_; }
  ObligationQueue& queue() { return queue_; }
  sat::Solver& main_solver() { return main_; }

 private:
  struct TimeoutSignal {};

  struct TraceNode {
    Cube cube;
    std::optional<std::size_t> successor;
    aiger::Bits inputs;      // inputs leading into the successor's cube
    aiger::Bits bad_inputs;  // CTI only: inputs raising bad after the step
    bool is_cti = false;
  };

  sat::SolveOutcome solve(sat::Solver& s, const std::vector<sat::Lit>& assumptions);
  void poll_deadline() const;
  std::vector<sat::Lit> frame_assumptions(std::size_t i);
  sat::Lit fresh_activation();
  void retire(sat::Lit act);

  Clause ind_gen_from(const Cube& s, std::size_t i, const Cube& core);
  Cube lift(const Cube& state, const aiger::Bits& inputs, const aiger::Bits* bad_inputs, const Cube* target);
  Cube keep_initiation(Cube cube, const Cube& full_state);
  void verify_lemma(const Clause& c, std::size_t i);

  void simplify_frames();
  bool push_one(const Clause& c, std::size_t i);
  certify::Witness build_witness(std::size_t failing_node);

  const TransitionSystem& ts_;
  CheckOptions opts_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::chrono::steady_clock::time_point start_;

  sat::Solver main_;
  CnfEncoding enc_;
  sat::Solver lift_;
  CnfEncoding lift_enc_;
  std::size_t lift_retired_ = 0;

  std::vector<std::vector<Clause>> frames_;
  ObligationQueue queue_;
  std::vector<TraceNode> nodes_;
  std::optional<std::size_t> failed_node_;

  Counters stats_;
  HeuristicState heur_;
};

Verdict check(const TransitionSystem& ts, const CheckOptions& opts = {});

}  // namespace slotic3::ic3
