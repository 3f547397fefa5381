#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace slotic3::sat {

/// Variables are numbered from 1; 0 is never a valid variable.
using Var = std::uint32_t;

class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(Var v, bool negated) : code_(2 * v + (negated ? 1u : 0u)) {}

  static constexpr Lit from_code(std::uint32_t code) {
    Lit l;
    l.code_ = code;
    return l;
  }
  /// DIMACS-style signed integer.
  static Lit from_dimacs(int x) {
    if (x == 0) throw std::invalid_argument("literal with variable index 0");
    return Lit(static_cast<Var>(x < 0 ? -x : x), x < 0);
  }

  constexpr Var var() const { return code_ >> 1; }
  constexpr bool negated() const { return code_ & 1u; }
  constexpr std::uint32_t code() const { return code_; }
  constexpr Lit operator~() const { return from_code(code_ ^ 1u); }
  int to_dimacs() const { return negated() ? -static_cast<int>(var()) : static_cast<int>(var()); }

  constexpr auto operator<=>(const Lit&) const = default;

 private:
  std::uint32_t code_ = 0;
};

enum class Status { Sat, Unsat, Unknown };

struct SolveOutcome {
  Status status = Status::Unknown;
  /// Indexed by variable; entry 0 unused. Filled for Sat only.
  std::vector<bool> model;
  /// Subset of the assumptions that is already unsatisfiable with the
  /// clause database. Filled for Unsat only; not minimized.
  std::vector<Lit> failed_assumptions;

  bool sat() const { return status == Status::Sat; }
  bool unsat() const { return status == Status::Unsat; }
  bool value(Lit l) const { return model.at(l.var()) != l.negated(); }
};

struct SolverConfig {
  double var_decay = 0.95;
  double clause_decay = 0.999;
  unsigned restart_base = 64;  // conflicts, scaled by the Luby sequence
  unsigned min_learnts = 2000;
  double learnt_growth = 1.1;
  double learnt_growth_cap = 2.0;  // max_learnts never exceeds cap * initial
};

struct SolverStats {
  std::uint64_t solves = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
  std::uint64_t reductions = 0;
  std::uint64_t simplifications = 0;
};

/// Incremental CDCL solver with assumptions: two watched literals, VSIDS,
/// phase saving, Luby restarts and LBD-based learnt clause deletion.
class Solver {
 public:
  explicit Solver(SolverConfig cfg = {});
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  Var new_var();
  std::uint32_t num_vars() const;
  std::size_t num_clauses() const;
  std::size_t num_learnts() const;

  /// Permanently asserts the clause. Tautologies are dropped. Returns false
  /// once the database is unsatisfiable at the top level.
  bool add_clause(std::span<const Lit> clause);
  bool add_clause(std::initializer_list<Lit> clause) {
    return add_clause(std::span<const Lit>(clause.begin(), clause.size()));
  }

  SolveOutcome solve(std::span<const Lit> assumptions = {});
  SolveOutcome solve(std::initializer_list<Lit> assumptions) {
    return solve(std::span<const Lit>(assumptions.begin(), assumptions.size()));
  }

  /// Removes clauses satisfied at the top level (e.g. those guarded by a
  /// retired activation literal).
  void simplify();

  /// Abort a running solve with Status::Unknown once this point passes.
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline);

  /// Top-level value of a literal: true, false, or nullopt if unassigned.
  std::optional<bool> fixed_value(Lit l) const;

  bool okay() const;
  const SolverStats& stats() const;

  /// Original (non-learnt) clauses plus top-level units, in DIMACS.
  void write_dimacs(std::ostream& os) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slotic3::sat
