#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace slotic3 {

/// Signed latch literal. Latches are 0-based here; the textual forms use
/// 1-based signed integers.
class StateLit {
 public:
  constexpr StateLit() = default;
  constexpr StateLit(std::uint32_t latch, bool negated) : code_(2 * latch + (negated ? 1u : 0u)) {}

  static StateLit from_signed(long x) {
    if (x == 0) throw std::invalid_argument("latch literal 0");
    return StateLit(static_cast<std::uint32_t>(std::labs(x) - 1), x < 0);
  }

  constexpr std::uint32_t latch() const { return code_ >> 1; }
  constexpr bool negated() const { return code_ & 1u; }
  constexpr StateLit operator~() const {
    StateLit l;
    l.code_ = code_ ^ 1u;
    return l;
  }
  long to_signed() const { return negated() ? -static_cast<long>(latch() + 1) : static_cast<long>(latch() + 1); }

  constexpr auto operator<=>(const StateLit&) const = default;

 private:
  std::uint32_t code_ = 0;
};

namespace detail {

/// Sorted, duplicate-free literal set without complementary pairs.
template <class Tag>
class LitSet {
 public:
  LitSet() = default;
  explicit LitSet(std::vector<StateLit> lits) : lits_(std::move(lits)) {
    std::sort(lits_.begin(), lits_.end());
    lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    for (std::size_t i = 0; i + 1 < lits_.size(); ++i)
      if (lits_[i].latch() == lits_[i + 1].latch())
        throw std::invalid_argument("complementary literals on latch " + std::to_string(lits_[i].latch() + 1));
  }

  const std::vector<StateLit>& lits() const { return lits_; }
  std::size_t size() const { return lits_.size(); }
  bool empty() const { return lits_.empty(); }
  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.end(); }
  const StateLit& operator[](std::size_t i) const { return lits_[i]; }

  bool contains(StateLit l) const { return std::binary_search(lits_.begin(), lits_.end(), l); }
  bool subset_of(const LitSet& other) const {
    return std::includes(other.lits_.begin(), other.lits_.end(), lits_.begin(), lits_.end());
  }
  LitSet without(StateLit l) const {
    LitSet r;
    r.lits_.reserve(lits_.size());
    for (auto x : lits_)
      if (x != l) r.lits_.push_back(x);
    return r;
  }

  std::string str() const {
    std::string s;
    for (auto l : lits_) {
      if (!s.empty()) s += ' ';
      s += std::to_string(l.to_signed());
    }
    return s;
  }

  bool operator==(const LitSet&) const = default;
  auto operator<=>(const LitSet& o) const {
    if (lits_.size() != o.lits_.size()) return lits_.size() <=> o.lits_.size();
    return lits_ <=> o.lits_;
  }

 private:
  std::vector<StateLit> lits_;
};

struct CubeTag {};
struct ClauseTag {};

}  // namespace detail

/// Conjunction of latch literals.
using Cube = detail::LitSet<detail::CubeTag>;
/// Disjunction of latch literals.
using Clause = detail::LitSet<detail::ClauseTag>;

inline Clause negate(const Cube& c) {
  std::vector<StateLit> l;
  l.reserve(c.size());
  for (auto x : c) l.push_back(~x);
  return Clause(std::move(l));
}

inline Cube negate(const Clause& c) {
  std::vector<StateLit> l;
  l.reserve(c.size());
  for (auto x : c) l.push_back(~x);
  return Cube(std::move(l));
}

}  // namespace slotic3
