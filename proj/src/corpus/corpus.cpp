#include "slotic3/corpus.hpp"

#include <random>
#include <stdexcept>

namespace slotic3::corpus {

using aiger::Lit;
using aiger::negate;

Lit CircuitBuilder::input() {
  auto l = fresh();
  c_.inputs.push_back(l);
  return l;
}

Lit CircuitBuilder::latch(int reset) {
  auto l = fresh();
  aiger::Latch x;
  x.current = l;
  x.reset = reset < 0 ? l : static_cast<Lit>(reset);
  c_.latches.push_back(x);
  return l;
}

void CircuitBuilder::set_next(Lit latch_lit, Lit next) {
  for (auto& l : c_.latches)
    if (l.current == latch_lit) {
      l.next = next;
      return;
    }
  throw std::invalid_argument("set_next: " + std::to_string(latch_lit) + " is not a latch");
}

Lit CircuitBuilder::and_(Lit a, Lit b) {
  if (a == aiger::kFalse || b == aiger::kFalse || a == negate(b)) return aiger::kFalse;
  if (a == aiger::kTrue) return b;
  if (b == aiger::kTrue || a == b) return a;
  auto l = fresh();
  c_.ands.push_back({l, std::max(a, b), std::min(a, b)});
  return l;
}

Lit CircuitBuilder::or_(Lit a, Lit b) { return negate(and_(negate(a), negate(b))); }

Lit CircuitBuilder::xor_(Lit a, Lit b) { return or_(and_(a, negate(b)), and_(negate(a), b)); }

Lit CircuitBuilder::mux(Lit sel, Lit then_, Lit else_) { return or_(and_(sel, then_), and_(negate(sel), else_)); }

Lit CircuitBuilder::and_all(const std::vector<Lit>& xs) {
  Lit r = aiger::kTrue;
  for (auto x : xs) r = and_(r, x);
  return r;
}

Lit CircuitBuilder::or_all(const std::vector<Lit>& xs) {
  Lit r = aiger::kFalse;
  for (auto x : xs) r = or_(r, x);
  return r;
}

Lit CircuitBuilder::equals(const std::vector<Lit>& word, std::uint64_t value) {
  std::vector<Lit> bits;
  for (std::size_t i = 0; i < word.size(); ++i) bits.push_back((value >> i) & 1 ? word[i] : negate(word[i]));
  if (word.size() < 64 && (value >> word.size()) != 0) return aiger::kFalse;
  return and_all(bits);
}

std::vector<Lit> CircuitBuilder::increment(const std::vector<Lit>& word, Lit inc) {
  std::vector<Lit> out;
  Lit carry = inc;
  for (auto b : word) {
    out.push_back(xor_(b, carry));
    carry = and_(b, carry);
  }
  return out;
}

Instance counter(unsigned bits, std::uint64_t modulus, std::uint64_t target) {
  CircuitBuilder b;
  auto en = b.input();
  std::vector<Lit> q;
  for (unsigned i = 0; i < bits; ++i) q.push_back(b.latch(0));
  auto wrap = b.and_(en, b.equals(q, modulus - 1));
  auto inc = b.increment(q, en);
  for (unsigned i = 0; i < bits; ++i) b.set_next(q[i], b.and_(negate(wrap), inc[i]));
  b.bad(b.equals(q, target));
  return {"cnt" + std::to_string(bits) + "_m" + std::to_string(modulus) + "_t" + std::to_string(target), b.build()};
}

Instance toggle(unsigned bits, bool safe) {
  CircuitBuilder b;
  if (safe) {
    std::vector<Lit> bad;
    for (unsigned i = 0; i < bits; ++i) {
      auto x = b.latch(0);
      auto y = b.latch(1);
      b.set_next(x, negate(x));
      b.set_next(y, negate(y));
      bad.push_back(b.eq(x, y));
    }
    b.bad(b.or_all(bad));
    return {"tgl" + std::to_string(bits) + "_safe", b.build()};
  }
  std::vector<Lit> t;
  for (unsigned i = 0; i < bits; ++i) t.push_back(b.latch(0));
  Lit carry = aiger::kTrue;
  for (unsigned i = 0; i < bits; ++i) {
    b.set_next(t[i], b.xor_(t[i], carry));
    carry = b.and_(carry, t[i]);
  }
  b.bad(b.and_all(t));
  return {"tgl" + std::to_string(bits) + "_unsafe", b.build()};
}

Instance shift(unsigned stages, bool safe) {
  CircuitBuilder b;
  auto in = b.input();
  std::vector<Lit> r1, r2;
  for (unsigned i = 0; i < stages; ++i) r1.push_back(b.latch(0));
  for (unsigned i = 0; i < stages; ++i) b.set_next(r1[i], i == 0 ? in : r1[i - 1]);
  if (!safe) {
    b.bad(b.and_all(r1));
    return {"shr" + std::to_string(stages) + "_unsafe", b.build()};
  }
  for (unsigned i = 0; i < stages; ++i) r2.push_back(b.latch(0));
  for (unsigned i = 0; i < stages; ++i) b.set_next(r2[i], i == 0 ? in : r2[i - 1]);
  std::vector<Lit> diff;
  for (unsigned i = 0; i < stages; ++i) diff.push_back(b.xor_(r1[i], r2[i]));
  b.bad(b.or_all(diff));
  return {"shr" + std::to_string(stages) + "_safe", b.build()};
}

Instance equal_counters(unsigned bits, bool skew) {
  CircuitBuilder b;
  auto en = b.input();
  std::vector<Lit> a, c;
  for (unsigned i = 0; i < bits; ++i) a.push_back(b.latch(0));
  for (unsigned i = 0; i < bits; ++i) c.push_back(b.latch(0));
  auto ia = b.increment(a, en);
  for (unsigned i = 0; i < bits; ++i) b.set_next(a[i], ia[i]);
  // With skew the second counter stops at its maximum instead of wrapping.
  auto sat = skew ? b.and_all(c) : aiger::kFalse;
  auto ic = b.increment(c, b.and_(en, negate(sat)));
  for (unsigned i = 0; i < bits; ++i) b.set_next(c[i], ic[i]);
  std::vector<Lit> diff;
  for (unsigned i = 0; i < bits; ++i) diff.push_back(b.xor_(a[i], c[i]));
  b.bad(b.or_all(diff));
  return {"eqc" + std::to_string(bits) + (skew ? "_skew" : "_same"), b.build()};
}

Instance random_aig(std::uint64_t seed, unsigned latches, unsigned inputs, unsigned ands) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  CircuitBuilder b;
  std::vector<Lit> pool, ls;
  for (unsigned i = 0; i < inputs; ++i) pool.push_back(b.input());
  for (unsigned i = 0; i < latches; ++i) {
    int reset = pick(8) == 0 ? -1 : static_cast<int>(pick(2));
    ls.push_back(b.latch(reset));
    pool.push_back(ls.back());
  }
  auto rand_lit = [&](std::size_t from) { return pool[from + pick(pool.size() - from)] ^ static_cast<Lit>(pick(2)); };
  for (unsigned i = 0; i < ands; ++i) {
    auto g = b.and_(rand_lit(0), rand_lit(0));
    if (g > 1) pool.push_back(g);
  }
  const std::size_t recent = pool.size() > 2 * latches ? pool.size() - 2 * latches : 0;
  for (auto l : ls) b.set_next(l, rand_lit(recent));
  std::vector<Lit> conj;
  for (unsigned i = 0; i < 2 + pick(3); ++i) conj.push_back(rand_lit(inputs));
  b.bad(b.and_all(conj));
  return {"rnd" + std::to_string(latches) + "_s" + std::to_string(seed), b.build()};
}

std::vector<Instance> small_corpus(std::uint64_t seed, std::size_t count, unsigned max_latches) {
  std::vector<Instance> out;
  std::mt19937_64 rng(seed);
  auto between = [&](unsigned lo, unsigned hi) { return lo + static_cast<unsigned>(rng() % (hi - lo + 1)); };
  const unsigned cb = std::min(max_latches, 6u);
  for (std::size_t i = 0; out.size() < count; ++i) {
    switch (i % 8) {
      case 0: {
        auto bits = between(2, cb);
        auto mod = between(2, 1u << bits);
        out.push_back(counter(bits, mod, between(0, (1u << bits) - 1)));
        break;
      }
      case 1: out.push_back(toggle(between(1, std::min(max_latches / 2, 5u)), i % 16 == 1)); break;
      case 2: out.push_back(shift(between(1, std::min(max_latches / 2, 6u)), (i / 8) % 2 == 0)); break;
      case 3: out.push_back(equal_counters(between(1, std::min(max_latches / 2, 6u)), (i / 8) % 2 == 1)); break;
      default: out.push_back(random_aig(rng(), between(1, max_latches), between(0, 3), between(5, 40))); break;
    }
    out.back().name += "_" + std::to_string(out.size() - 1);
  }
  return out;
}

std::vector<Instance> case_study_corpus(std::uint64_t seed, std::size_t count) {
  std::vector<Instance> out;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; out.size() < count; ++i) {
    if (i % 6 == 5) {
      // Unsafe: the counter reaches the target well before wrapping.
      unsigned bits = 6 + static_cast<unsigned>(rng() % 2);
      out.push_back(counter(bits, 1u << bits, 16 + rng() % 24));
    } else {
      // Safe: the target lies between the modulus and the word maximum.
      unsigned bits = 8 + static_cast<unsigned>(rng() % 2);
      std::uint64_t hi = std::uint64_t{1} << bits;
      // Small 9-bit moduli make proofs take tens of seconds; keep them out.
      std::uint64_t lo = bits == 9 ? hi * 11 / 16 : hi / 2;
      std::uint64_t mod = lo + rng() % (hi - lo);
      out.push_back(counter(bits, mod, mod + rng() % (hi - mod)));
    }
    out.back().name += "_" + std::to_string(out.size() - 1);
  }
  return out;
}

}  // namespace slotic3::corpus
