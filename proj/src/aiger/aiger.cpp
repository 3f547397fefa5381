#include "slotic3/aiger.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace slotic3::aiger {

namespace {

struct Header {
  bool binary = false;
  std::uint64_t m = 0, i = 0, l = 0, o = 0, a = 0, b = 0, c = 0, j = 0, f = 0;
};

// Line-oriented cursor used for the ASCII body and for the textual prefix
// of the binary format (header, latches, outputs, bads).
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  std::size_t line() const { return line_; }
  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ >= text_.size(); }

  std::string_view next_line() {
    if (at_end()) throw ParseError("unexpected end of file", line_ + 1, true);
    auto nl = text_.find('\n', pos_);
    std::string_view line =
        text_.substr(pos_, nl == std::string_view::npos ? std::string_view::npos : nl - pos_);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::uint64_t> parse_numbers(std::string_view line, std::size_t lineno) {
  std::vector<std::uint64_t> out;
  std::size_t p = 0;
  while (p < line.size()) {
    if (line[p] == ' ') {
      ++p;
      continue;
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data() + p, line.data() + line.size(), v);
    if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' '))
      throw ParseError("expected unsigned integer", lineno, true);
    out.push_back(v);
    p = static_cast<std::size_t>(ptr - line.data());
  }
  return out;
}

Header parse_header(Cursor& cur) {
  auto line = cur.next_line();
  Header h;
  if (line.starts_with("aag ")) {
    h.binary = false;
  } else if (line.starts_with("aig ")) {
    h.binary = true;
  } else {
    throw ParseError("malformed header: expected 'aag' or 'aig'", 1, true);
  }
  auto nums = parse_numbers(line.substr(4), 1);
  if (nums.size() < 5 || nums.size() > 9)
    throw ParseError("malformed header: expected M I L O A [B C J F]", 1, true);
  h.m = nums[0];
  h.i = nums[1];
  h.l = nums[2];
  h.o = nums[3];
  h.a = nums[4];
  if (nums.size() > 5) h.b = nums[5];
  if (nums.size() > 6) h.c = nums[6];
  if (nums.size() > 7) h.j = nums[7];
  if (nums.size() > 8) h.f = nums[8];
  if (h.c != 0) throw ParseError("invariant constraints (C section) are not supported", 1, true);
  if (h.j != 0 || h.f != 0)
    throw ParseError("justice/fairness properties (J/F sections) are not supported", 1, true);
  if (h.m > (1ull << 30)) throw ParseError("maximum variable index too large", 1, true);
  if (h.i + h.l + h.a > h.m) throw ParseError("M is smaller than I + L + A", 1, true);
  if (h.binary && h.i + h.l + h.a != h.m)
    throw ParseError("binary format requires M = I + L + A", 1, true);
  return h;
}

void check_lit(Lit l, std::uint64_t m, std::size_t lineno) {
  if (var_of(l) > m) throw ParseError("literal " + std::to_string(l) + " out of range", lineno, true);
}

// Variable definitions: which entity defines each var.
enum class Def : std::uint8_t { None, Input, Latch, And };

struct Builder {
  AigerCircuit c;
  std::vector<Def> defs;
  std::vector<std::uint32_t> and_index;  // var -> index into c.ands
  // Source position of each latch, output/bad and AND, for error messages.
  struct Where {
    std::size_t pos = 0;
    bool is_line = true;
  };
  std::vector<Where> latch_at, out_at, bad_at, and_at;

  explicit Builder(std::uint64_t m) : defs(m + 1, Def::None), and_index(m + 1, 0) {
    c.max_var = static_cast<std::uint32_t>(m);
  }

  void define(Lit lhs, Def d, std::size_t pos, bool is_line) {
    if (lhs < 2 || is_negated(lhs))
      throw ParseError("defined literal must be even and non-constant", pos, is_line);
    auto v = var_of(lhs);
    if (defs[v] != Def::None)
      throw ParseError(std::string(d == Def::And ? "duplicate AND definition"
                                                 : "variable defined twice") +
                           " for literal " + std::to_string(lhs),
                       pos, is_line);
    defs[v] = d;
  }
};

// Orders ANDs so that every gate follows the gates it reads, and rejects
// references to undefined variables and combinational cycles.
void finalize(Builder& b) {
  auto& c = b.c;
  auto defined = [&](Lit l) { return var_of(l) == 0 || b.defs[var_of(l)] != Def::None; };
  auto fail = [](const std::string& what, const Builder::Where& w) { throw ParseError(what, w.pos, w.is_line); };
  for (std::size_t k = 0; k < c.latches.size(); ++k)
    if (!defined(c.latches[k].next)) fail("latch next-state uses undefined variable", b.latch_at[k]);
  for (std::size_t k = 0; k < c.outputs.size(); ++k)
    if (!defined(c.outputs[k])) fail("output uses undefined variable", b.out_at[k]);
  for (std::size_t k = 0; k < c.bads.size(); ++k)
    if (!defined(c.bads[k])) fail("bad-state property uses undefined variable", b.bad_at[k]);
  for (std::size_t k = 0; k < c.ands.size(); ++k)
    if (!defined(c.ands[k].rhs0) || !defined(c.ands[k].rhs1))
      fail("AND gate " + std::to_string(c.ands[k].lhs) + " uses undefined variable", b.and_at[k]);

  for (std::uint32_t k = 0; k < c.ands.size(); ++k) b.and_index[var_of(c.ands[k].lhs)] = k;

  std::vector<std::uint8_t> mark(c.ands.size(), 0);  // 0 new, 1 on stack, 2 done
  std::vector<AndGate> order;
  order.reserve(c.ands.size());
  std::vector<std::pair<std::uint32_t, int>> stack;
  for (std::uint32_t root = 0; root < c.ands.size(); ++root) {
    if (mark[root]) continue;
    stack.push_back({root, 0});
    mark[root] = 1;
    while (!stack.empty()) {
      auto& [k, child] = stack.back();
      if (child < 2) {
        Lit r = child == 0 ? c.ands[k].rhs0 : c.ands[k].rhs1;
        ++child;
        auto v = var_of(r);
        if (v != 0 && b.defs[v] == Def::And) {
          auto dep = b.and_index[v];
          if (mark[dep] == 1)
            fail("combinational cycle through AND " + std::to_string(c.ands[dep].lhs), b.and_at[dep]);
          if (mark[dep] == 0) {
            mark[dep] = 1;
            stack.push_back({dep, 0});
          }
        }
        continue;
      }
      mark[k] = 2;
      order.push_back(c.ands[k]);
      stack.pop_back();
    }
  }
  c.ands = std::move(order);
}

AigerCircuit parse_ascii(Cursor& cur, const Header& h) {
  Builder b(h.m);
  auto& c = b.c;
  for (std::uint64_t k = 0; k < h.i; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.size() != 1) throw ParseError("input line must hold one literal", cur.line(), true);
    Lit l = static_cast<Lit>(nums[0]);
    check_lit(l, h.m, cur.line());
    b.define(l, Def::Input, cur.line(), true);
    c.inputs.push_back(l);
  }
  for (std::uint64_t k = 0; k < h.l; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.size() < 2 || nums.size() > 3)
      throw ParseError("latch line must hold 2 or 3 literals", cur.line(), true);
    Latch latch;
    latch.current = static_cast<Lit>(nums[0]);
    latch.next = static_cast<Lit>(nums[1]);
    latch.reset = nums.size() == 3 ? static_cast<Lit>(nums[2]) : 0;
    check_lit(latch.current, h.m, cur.line());
    check_lit(latch.next, h.m, cur.line());
    if (latch.reset != 0 && latch.reset != 1 && latch.reset != latch.current)
      throw ParseError("latch reset must be 0, 1 or the latch literal", cur.line(), true);
    b.define(latch.current, Def::Latch, cur.line(), true);
    c.latches.push_back(latch);
    b.latch_at.push_back({cur.line(), true});
  }
  for (std::uint64_t k = 0; k < h.o + h.b; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.size() != 1) throw ParseError("output line must hold one literal", cur.line(), true);
    Lit l = static_cast<Lit>(nums[0]);
    check_lit(l, h.m, cur.line());
    (k < h.o ? c.outputs : c.bads).push_back(l);
    (k < h.o ? b.out_at : b.bad_at).push_back({cur.line(), true});
  }
  for (std::uint64_t k = 0; k < h.a; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.size() != 3) throw ParseError("AND line must hold three literals", cur.line(), true);
    AndGate g{static_cast<Lit>(nums[0]), static_cast<Lit>(nums[1]), static_cast<Lit>(nums[2])};
    check_lit(g.lhs, h.m, cur.line());
    check_lit(g.rhs0, h.m, cur.line());
    check_lit(g.rhs1, h.m, cur.line());
    b.define(g.lhs, Def::And, cur.line(), true);
    c.ands.push_back(g);
    b.and_at.push_back({cur.line(), true});
  }
  finalize(b);
  return std::move(b.c);
}

AigerCircuit parse_binary(std::string_view bytes, Cursor& cur, const Header& h) {
  Builder b(h.m);
  auto& c = b.c;
  for (std::uint64_t k = 0; k < h.i; ++k) {
    Lit l = static_cast<Lit>(2 * (k + 1));
    b.define(l, Def::Input, 0, false);
    c.inputs.push_back(l);
  }
  for (std::uint64_t k = 0; k < h.l; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.empty() || nums.size() > 2)
      throw ParseError("latch line must hold 1 or 2 literals", cur.line(), true);
    Latch latch;
    latch.current = static_cast<Lit>(2 * (h.i + k + 1));
    latch.next = static_cast<Lit>(nums[0]);
    latch.reset = nums.size() == 2 ? static_cast<Lit>(nums[1]) : 0;
    check_lit(latch.next, h.m, cur.line());
    if (latch.reset != 0 && latch.reset != 1 && latch.reset != latch.current)
      throw ParseError("latch reset must be 0, 1 or the latch literal", cur.line(), true);
    b.define(latch.current, Def::Latch, cur.line(), true);
    c.latches.push_back(latch);
    b.latch_at.push_back({cur.line(), true});
  }
  for (std::uint64_t k = 0; k < h.o + h.b; ++k) {
    auto nums = parse_numbers(cur.next_line(), cur.line());
    if (nums.size() != 1) throw ParseError("output line must hold one literal", cur.line(), true);
    Lit l = static_cast<Lit>(nums[0]);
    check_lit(l, h.m, cur.line());
    (k < h.o ? c.outputs : c.bads).push_back(l);
    (k < h.o ? b.out_at : b.bad_at).push_back({cur.line(), true});
  }
  std::size_t pos = cur.offset();
  auto decode = [&]() -> std::uint64_t {
    std::uint64_t x = 0;
    unsigned shift = 0;
    while (true) {
      if (pos >= bytes.size()) throw ParseError("truncated AND delta stream", pos, false);
      auto ch = static_cast<unsigned char>(bytes[pos++]);
      if (shift > 56) throw ParseError("AND delta overflows", pos - 1, false);
      x |= static_cast<std::uint64_t>(ch & 0x7f) << shift;
      if (!(ch & 0x80)) return x;
      shift += 7;
    }
  };
  for (std::uint64_t k = 0; k < h.a; ++k) {
    std::size_t start = pos;
    std::uint64_t lhs = 2 * (h.i + h.l + k + 1);
    std::uint64_t d0 = decode();
    if (d0 == 0 || d0 > lhs) throw ParseError("invalid AND delta", start, false);
    std::uint64_t rhs0 = lhs - d0;
    std::uint64_t d1 = decode();
    if (d1 > rhs0) throw ParseError("invalid AND delta", start, false);
    std::uint64_t rhs1 = rhs0 - d1;
    AndGate g{static_cast<Lit>(lhs), static_cast<Lit>(rhs0), static_cast<Lit>(rhs1)};
    b.define(g.lhs, Def::And, start, false);
    c.ands.push_back(g);
    b.and_at.push_back({start, false});
  }
  finalize(b);
  return std::move(b.c);
}

void encode_delta(std::string& out, std::uint64_t x) {
  while (x & ~0x7full) {
    out.push_back(static_cast<char>((x & 0x7f) | 0x80));
    x >>= 7;
  }
  out.push_back(static_cast<char>(x));
}

std::string header_line(const char* magic, const AigerCircuit& c) {
  std::ostringstream os;
  os << magic << ' ' << c.max_var << ' ' << c.inputs.size() << ' ' << c.latches.size() << ' '
     << c.outputs.size() << ' ' << c.ands.size();
  if (!c.bads.empty()) os << ' ' << c.bads.size();
  os << '\n';
  return os.str();
}

}  // namespace

AigerCircuit parse(std::string_view bytes) {
  Cursor cur(bytes);
  Header h = parse_header(cur);
  return h.binary ? parse_binary(bytes, cur, h) : parse_ascii(cur, h);
}

AigerCircuit parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(data);
}

AigerCircuit normalize(const AigerCircuit& c) {
  std::vector<Lit> map(c.max_var + 1, 0);
  std::uint32_t next = 1;
  for (auto l : c.inputs) map[var_of(l)] = 2 * next++;
  for (auto& l : c.latches) map[var_of(l.current)] = 2 * next++;
  for (auto& g : c.ands) map[var_of(g.lhs)] = 2 * next++;
  auto tr = [&](Lit l) { return var_of(l) == 0 ? l : (map[var_of(l)] | (l & 1u)); };

  AigerCircuit n;
  n.max_var = next - 1;
  for (auto l : c.inputs) n.inputs.push_back(tr(l));
  for (auto& l : c.latches) {
    Latch nl{tr(l.current), tr(l.next), l.uninitialized() ? tr(l.current) : l.reset};
    n.latches.push_back(nl);
  }
  for (auto l : c.outputs) n.outputs.push_back(tr(l));
  for (auto l : c.bads) n.bads.push_back(tr(l));
  for (auto& g : c.ands) {
    AndGate ng{tr(g.lhs), tr(g.rhs0), tr(g.rhs1)};
    if (ng.rhs0 < ng.rhs1) std::swap(ng.rhs0, ng.rhs1);
    n.ands.push_back(ng);
  }
  return n;
}

std::string to_ascii(const AigerCircuit& c) {
  std::string out = header_line("aag", c);
  auto put = [&](std::initializer_list<Lit> lits) {
    bool first = true;
    for (auto l : lits) {
      if (!first) out.push_back(' ');
      out += std::to_string(l);
      first = false;
    }
    out.push_back('\n');
  };
  for (auto l : c.inputs) put({l});
  for (auto& l : c.latches) {
    if (l.reset == 0)
      put({l.current, l.next});
    else
      put({l.current, l.next, l.reset});
  }
  for (auto l : c.outputs) put({l});
  for (auto l : c.bads) put({l});
  for (auto& g : c.ands) put({g.lhs, g.rhs0, g.rhs1});
  return out;
}

std::string to_binary(const AigerCircuit& circuit) {
  AigerCircuit c = normalize(circuit);
  std::string out = header_line("aig", c);
  for (auto& l : c.latches) {
    out += std::to_string(l.next);
    if (l.reset != 0) out += ' ' + std::to_string(l.reset);
    out.push_back('\n');
  }
  for (auto l : c.outputs) out += std::to_string(l) + '\n';
  for (auto l : c.bads) out += std::to_string(l) + '\n';
  for (auto& g : c.ands) {
    encode_delta(out, g.lhs - g.rhs0);
    encode_delta(out, g.rhs0 - g.rhs1);
  }
  return out;
}

std::vector<bool> evaluate(const AigerCircuit& c, const Bits& state, const Bits& inputs) {
  if (state.size() != c.latches.size())
    throw std::invalid_argument("state width " + std::to_string(state.size()) +
                                " does not match latch count " + std::to_string(c.latches.size()));
  if (inputs.size() != c.inputs.size())
    throw std::invalid_argument("input width " + std::to_string(inputs.size()) +
                                " does not match input count " + std::to_string(c.inputs.size()));
  std::vector<bool> val(c.max_var + 1, false);
  for (std::size_t k = 0; k < inputs.size(); ++k) val[var_of(c.inputs[k])] = inputs[k];
  for (std::size_t k = 0; k < state.size(); ++k) val[var_of(c.latches[k].current)] = state[k];
  auto get = [&](Lit l) { return static_cast<bool>(val[var_of(l)]) != is_negated(l); };
  for (auto& g : c.ands) val[var_of(g.lhs)] = get(g.rhs0) && get(g.rhs1);
  return val;
}

StepResult simulate_step(const AigerCircuit& c, const Bits& state, const Bits& inputs,
                         std::size_t property) {
  auto val = evaluate(c, state, inputs);
  auto get = [&](Lit l) { return static_cast<bool>(val[var_of(l)]) != is_negated(l); };
  StepResult r;
  r.next_state.reserve(c.latches.size());
  for (auto& l : c.latches) r.next_state.push_back(get(l.next));
  const auto& props = c.properties();
  if (!props.empty()) {
    if (property >= props.size()) throw std::invalid_argument("property index out of range");
    r.bad = get(props[property]);
  }
  return r;
}

Bits reset_state(const AigerCircuit& c, bool free_value) {
  Bits s;
  s.reserve(c.latches.size());
  for (auto& l : c.latches) s.push_back(l.uninitialized() ? free_value : l.reset == 1);
  return s;
}

}  // namespace slotic3::aiger
