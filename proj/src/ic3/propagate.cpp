// push_prop slot: clause propagation between frames and frame cleanup.
#include <algorithm>

#include "slotic3/ic3.hpp"

namespace slotic3::ic3 {

bool Engine::push_one(const Clause& c, std::size_t i) {
  ++stats_.push_attempts;
  auto a = frame_assumptions(i);
  for (auto l : prime(enc_, negate(c))) a.push_back(l);
  if (solve(main_, a).sat()) return false;
  std::vector<sat::Lit> lits{~enc_.activation(i + 1, main_)};
  for (auto l : c) lits.push_back(enc_.cur_lit(l));
  main_.add_clause(lits);
  frames_[i + 1].push_back(c);
  ++stats_.push_successes;
  return true;
}

// Drops every clause subsumed by a clause stored at the same or a higher
// level, then lets the solver discard retired activation clauses.
void Engine::simplify_frames() {
  ++stats_.simplify_calls;
  for (std::size_t lvl = 1; lvl < frames_.size(); ++lvl) {
    auto& clauses = frames_[lvl];
    std::sort(clauses.begin(), clauses.end());
    clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
    std::vector<Clause> kept;
    for (std::size_t j = 0; j < clauses.size(); ++j) {
      bool subsumed = false;
      for (std::size_t hi = lvl; hi < frames_.size() && !subsumed; ++hi)
        for (std::size_t m = 0; m < frames_[hi].size() && !subsumed; ++m) {
          if (hi == lvl && m == j) continue;
          const auto& d = frames_[hi][m];
          // Clauses are ordered by size, so a proper subset sorts first;
          // equal clauses at the same level were deduplicated above.
          if (d.size() < clauses[j].size() || (hi > lvl && d.size() == clauses[j].size()))
            subsumed = d.subset_of(clauses[j]);
        }
      if (subsumed)
        ++stats_.subsumed;
      else
        kept.push_back(clauses[j]);
    }
    clauses = std::move(kept);
  }
  main_.simplify();
}

void Engine::push_clauses(std::size_t k) {
  const auto& policy = opts_.policies.push_prop;
  const auto& v = policy.variant;
  if (v != "baseline" && v != "gated_simplify" && v != "stall_skip" && v != "adaptive_budget")
    throw PolicyError("unsupported push_prop variant " + v);
  const bool budgeted = v == "adaptive_budget";

  ++stats_.push_rounds;
  ++heur_.round;
  heur_.stall_streak.resize(frames_.size(), 0);
  heur_.last_round_queries.assign(frames_.size(), 0);
  if (budgeted) heur_.push_budget.resize(frames_.size(), static_cast<unsigned>(policy.param("base")));

  std::size_t attempted = 0, pushed = 0;
  for (std::size_t i = 1; i < k && i + 1 < frames_.size(); ++i) {
    if ((v == "stall_skip" || budgeted) && heur_.stall_streak[i] >= static_cast<unsigned>(policy.param("limit"))) {
      // Skip this round only; the frame is retried next round.
      heur_.stall_streak[i] = 0;
      ++stats_.push_frames_skipped;
      continue;
    }
    // The budget is charged for failed attempts only; a clause that moves
    // forward costs nothing.
    std::size_t budget = budgeted ? heur_.push_budget[i] : frames_[i].size();
    std::vector<Clause> remaining, failed;
    unsigned succ = 0, tries = 0, fail_run = 0;
    auto clauses = std::move(frames_[i]);
    frames_[i].clear();
    if (budgeted)
      // Clauses that never failed come first, then the stalest failures.
      std::stable_sort(clauses.begin(), clauses.end(), [&](const Clause& a, const Clause& b) {
        auto fa = heur_.last_failure.find(a), fb = heur_.last_failure.find(b);
        auto ra = fa == heur_.last_failure.end() ? 0 : fa->second;
        auto rb = fb == heur_.last_failure.end() ? 0 : fb->second;
        return ra < rb;
      });
    for (auto& c : clauses) {
      if (failed.size() >= budget) {
        remaining.push_back(std::move(c));
        continue;
      }
      ++tries;
      ++heur_.last_round_queries[i];
      if (push_one(c, i)) {
        ++succ;
        fail_run = 0;
        if (budgeted) heur_.last_failure.erase(c);
      } else {
        ++fail_run;
        if (budgeted) heur_.last_failure[c] = heur_.round;
        failed.push_back(std::move(c));
      }
    }
    remaining.insert(remaining.end(), std::make_move_iterator(failed.begin()), std::make_move_iterator(failed.end()));
    frames_[i] = std::move(remaining);
    attempted += tries;
    pushed += succ;

    if (succ > 0)
      heur_.stall_streak[i] = 0;
    else if (tries > 0)
      ++heur_.stall_streak[i];

    if (budgeted) {
      auto& b = heur_.push_budget[i];
      if (succ > 0)
        b = std::min<unsigned>(b * 2, static_cast<unsigned>(policy.param("cap")));
      else if (tries > 0)
        b = std::max<unsigned>(b / 4, static_cast<unsigned>(policy.param("floor")));
      if (succ == 0 && fail_run >= static_cast<unsigned>(policy.param("early_cut"))) {
        ++stats_.push_early_cuts;
        break;
      }
    }
  }
  heur_.push_success_rate = attempted ? static_cast<double>(pushed) / static_cast<double>(attempted) : 0.0;

  bool do_simplify = true;
  if (v != "baseline") {
    ++heur_.rounds_since_simplify;
    do_simplify = pushed > 0 || heur_.rounds_since_simplify >= static_cast<unsigned>(policy.param("checkpoint"));
  }
  if (do_simplify) {
    heur_.rounds_since_simplify = 0;
    simplify_frames();
  }
}

}  // namespace slotic3::ic3
