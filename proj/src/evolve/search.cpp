// Compass & Jump slot selection.
#include <algorithm>
#include <limits>
#include <sstream>

#include "slotic3/evolve.hpp"

namespace slotic3::evolve {

double score_move(const Move& m, const Weights& w) { return w.conf * m.conf - w.risk * m.risk - w.cost * m.cost; }

MoveSet rank_by_score(MoveSet moves, const Weights& w) {
  std::stable_sort(moves.begin(), moves.end(),
                   [&](const Move& a, const Move& b) { return score_move(a, w) > score_move(b, w); });
  return moves;
}

MoveSet top_distinct_slots(const MoveSet& ranked, unsigned j) {
  MoveSet out;
  for (const auto& m : ranked) {
    if (out.size() >= j) break;
    if (std::none_of(out.begin(), out.end(), [&](const Move& x) { return x.slot == m.slot; })) out.push_back(m);
  }
  return out;
}

double adjust_jump(double p, const std::vector<RoundOutcome>& history, const JumpBounds& b) {
  std::size_t promoted = 0, stagnant = 0;
  for (auto it = history.rbegin(); it != history.rend() && it->promoted; ++it) ++promoted;
  for (auto it = history.rbegin(); it != history.rend() && !it->promoted; ++it) ++stagnant;
  if (promoted >= b.steady_streak) p = b.shrink * p;
  else if (stagnant >= b.stagnant_streak) p = p + b.grow;
  return std::clamp(p, b.p_min, b.p_max);
}

bool volatile_history(const std::vector<RoundOutcome>& history) {
  // Four transitions between the last five deltas; zero deltas carry no sign.
  const std::size_t n = history.size();
  const std::size_t from = n > 5 ? n - 5 : 0;
  unsigned flips = 0;
  for (std::size_t i = from + 1; i < n; ++i)
    if (history[i].par2_delta * history[i - 1].par2_delta < 0) ++flips;
  return flips >= 2;
}

Move select_best(const MoveSet& ranked, const std::vector<RoundOutcome>& history) {
  if (ranked.empty()) throw std::invalid_argument("select_best: empty MoveSet");
  if (!volatile_history(history)) return ranked.front();
  std::vector<double> risks;
  for (const auto& m : ranked) risks.push_back(m.risk);
  std::sort(risks.begin(), risks.end());
  const std::size_t k = risks.size();
  const double median = k % 2 ? risks[k / 2] : (risks[k / 2 - 1] + risks[k / 2]) / 2;
  for (const auto& m : ranked)
    if (m.risk <= median) return m;
  return ranked.front();
}

double PolicyRng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

std::size_t PolicyRng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("PolicyRng::index: empty range");
  const auto max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  for (;;) {
    auto x = eng_();
    if (x <= limit) return static_cast<std::size_t>(x % n);
  }
}

std::string PolicyRng::state() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void PolicyRng::restore(const std::string& s) {
  std::istringstream is(s);
  is >> eng_;
  if (!is) throw std::invalid_argument("PolicyRng: corrupt state");
}

Scope compass_jump(const std::vector<std::string>& slots, const MoveSet& moves, PolicyState& state) {
  if (slots.empty()) throw std::invalid_argument("compass_jump: no slots");
  MoveSet usable;
  for (const auto& m : moves)
    if (std::find(slots.begin(), slots.end(), m.slot) != slots.end()) usable.push_back(m);
  Scope s;
  if (usable.empty()) {
    s.allowed = {slots[state.rng.index(slots.size())]};
    return s;
  }
  state.p_jump = adjust_jump(state.p_jump, state.history, state.bounds);
  auto ranked = rank_by_score(std::move(usable), state.weights);
  if (state.rng.uniform() < state.p_jump) {
    s.guidance = top_distinct_slots(ranked, state.jump_size);
    s.jump = true;
  } else {
    s.guidance = {select_best(ranked, state.history)};
  }
  for (const auto& m : s.guidance)
    if (std::find(s.allowed.begin(), s.allowed.end(), m.slot) == s.allowed.end()) s.allowed.push_back(m.slot);
  return s;
}

}  // namespace slotic3::evolve
