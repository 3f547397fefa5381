#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slotic3::aiger {

/// AIGER literal: 2*var + sign. 0 is constant false, 1 constant true.
using Lit = std::uint32_t;

constexpr Lit kFalse = 0;
constexpr Lit kTrue = 1;

constexpr std::uint32_t var_of(Lit l) { return l >> 1; }
constexpr bool is_negated(Lit l) { return (l & 1u) != 0; }
constexpr Lit negate(Lit l) { return l ^ 1u; }

struct Latch {
  Lit current = 0;
  Lit next = 0;
  /// 0, 1, or `current` itself for an uninitialized latch.
  Lit reset = 0;

  bool uninitialized() const { return reset == current; }
  bool operator==(const Latch&) const = default;
};

struct AndGate {
  Lit lhs = 0;
  Lit rhs0 = 0;
  Lit rhs1 = 0;
  bool operator==(const AndGate&) const = default;
};

/// Parse failure with the byte offset (binary) or line number (ASCII)
/// where the problem was detected.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position, bool is_line)
      : std::runtime_error(what + (is_line ? " (line " : " (byte ") +
                           std::to_string(position) + ")"),
        position_(position),
        is_line_(is_line) {}

  std::size_t position() const { return position_; }
  bool is_line() const { return is_line_; }

 private:
  std::size_t position_;
  bool is_line_;
};

/// Validated gate-level netlist. `ands` is stored in topological order
/// (every AND appears after the ANDs it reads), so a single forward pass
/// evaluates the circuit.
struct AigerCircuit {
  std::uint32_t max_var = 0;
  std::vector<Lit> inputs;
  std::vector<Latch> latches;
  std::vector<Lit> outputs;
  std::vector<Lit> bads;
  std::vector<AndGate> ands;

  /// Bad-state properties: the `B` section when present, otherwise the
  /// outputs (AIGER 1.0 convention).
  const std::vector<Lit>& properties() const { return bads.empty() ? outputs : bads; }

  bool operator==(const AigerCircuit&) const = default;
};

using Bits = std::vector<bool>;

/// Parses ASCII (`aag`) or binary (`aig`) AIGER 1.x, sniffing the header.
AigerCircuit parse(std::string_view bytes);
AigerCircuit parse_file(const std::string& path);

/// Renumbers variables into binary-format order: inputs, then latches,
/// then ANDs with lhs > rhs0 >= rhs1. Unused variables are kept only if
/// they sit below max_var of the renumbered circuit.
AigerCircuit normalize(const AigerCircuit& c);

std::string to_ascii(const AigerCircuit& c);
/// Binary encoding of normalize(c).
std::string to_binary(const AigerCircuit& c);

struct StepResult {
  Bits next_state;
  bool bad = false;
};

/// One synchronous step: evaluate all ANDs under (state, inputs), return
/// the latch next-state values and the value of the selected property.
StepResult simulate_step(const AigerCircuit& c, const Bits& state, const Bits& inputs,
                         std::size_t property = 0);

/// Full variable valuation (index = var) for (state, inputs). Exposed for
/// callers that need intermediate gate values.
std::vector<bool> evaluate(const AigerCircuit& c, const Bits& state, const Bits& inputs);

/// Initial latch values; uninitialized latches take `free_value`.
Bits reset_state(const AigerCircuit& c, bool free_value = false);

}  // namespace slotic3::aiger
