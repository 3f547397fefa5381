#include "slotic3/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>

namespace slotic3::sat {

namespace {

struct Clause {
  std::vector<Lit> lits;
  bool learnt = false;
  bool deleted = false;
  std::uint32_t lbd = 0;
  double activity = 0;
};

struct Watcher {
  Clause* clause;
  Lit blocker;
};

// Value of a literal: +1 true, -1 false, 0 unassigned.
using LBool = std::int8_t;

double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

// Max-heap of variables keyed by activity.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}

  bool empty() const { return heap_.empty(); }
  bool contains(Var v) const { return v < index_.size() && index_[v] >= 0; }

  void grow(Var v) {
    if (index_.size() <= v) index_.resize(v + 1, -1);
  }
  void insert(Var v) {
    grow(v);
    if (contains(v)) return;
    index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(index_[v]);
  }
  void increased(Var v) {
    if (contains(v)) up(index_[v]);
  }
  Var pop() {
    Var top = heap_.front();
    heap_.front() = heap_.back();
    index_[heap_.front()] = 0;
    index_[top] = -1;
    heap_.pop_back();
    if (!heap_.empty()) down(0);
    return top;
  }

 private:
  bool less(Var a, Var b) const { return act_[a] > act_[b]; }
  void up(int i) {
    Var v = heap_[i];
    while (i > 0) {
      int p = (i - 1) >> 1;
      if (!less(v, heap_[p])) break;
      heap_[i] = heap_[p];
      index_[heap_[i]] = i;
      i = p;
    }
    heap_[i] = v;
    index_[v] = i;
  }
  void down(int i) {
    Var v = heap_[i];
    int n = static_cast<int>(heap_.size());
    while (2 * i + 1 < n) {
      int c = 2 * i + 1;
      if (c + 1 < n && less(heap_[c + 1], heap_[c])) ++c;
      if (!less(heap_[c], v)) break;
      heap_[i] = heap_[c];
      index_[heap_[i]] = i;
      i = c;
    }
    heap_[i] = v;
    index_[v] = i;
  }

  const std::vector<double>& act_;
  std::vector<Var> heap_;
  std::vector<int> index_;
};

enum class SearchResult { Sat, Unsat, Restart, Timeout };

}  // namespace

struct Solver::Impl {
  SolverConfig cfg;
  SolverStats stats;
  bool ok = true;

  std::uint32_t nvars = 0;
  std::vector<LBool> assigns{0};
  std::vector<int> level{0};
  std::vector<Clause*> reason{nullptr};
  std::vector<bool> polarity{true};  // saved phase: true means negative
  std::vector<double> activity{0};
  std::vector<std::uint8_t> seen{0};
  std::vector<std::vector<Watcher>> watches{2};
  VarHeap order{activity};

  std::vector<std::unique_ptr<Clause>> originals;
  std::vector<std::unique_ptr<Clause>> learnts;

  std::vector<Lit> trail;
  std::vector<std::size_t> trail_lim;
  std::size_t qhead = 0;

  double var_inc = 1;
  double cla_inc = 1;
  double max_learnts = 0;
  double learnt_cap = 0;

  std::optional<std::chrono::steady_clock::time_point> deadline;

  std::vector<Lit> assumptions;
  std::vector<Lit> failed;

  LBool value(Lit l) const {
    LBool a = assigns[l.var()];
    return l.negated() ? static_cast<LBool>(-a) : a;
  }
  int decision_level() const { return static_cast<int>(trail_lim.size()); }

  void check_lit(Lit l) const {
    if (l.var() == 0) throw std::invalid_argument("literal with variable index 0");
    if (l.var() > nvars) throw std::invalid_argument("literal refers to unknown variable");
  }

  Var new_var() {
    Var v = ++nvars;
    assigns.push_back(0);
    level.push_back(0);
    reason.push_back(nullptr);
    polarity.push_back(true);
    activity.push_back(0);
    seen.push_back(0);
    watches.emplace_back();
    watches.emplace_back();
    order.insert(v);
    return v;
  }

  void enqueue(Lit p, Clause* from) {
    assigns[p.var()] = p.negated() ? -1 : 1;
    level[p.var()] = decision_level();
    reason[p.var()] = from;
    trail.push_back(p);
  }

  void attach(Clause* c) {
    watches[(~c->lits[0]).code()].push_back({c, c->lits[1]});
    watches[(~c->lits[1]).code()].push_back({c, c->lits[0]});
  }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail.size(); i-- > trail_lim[lvl];) {
      Var v = trail[i].var();
      assigns[v] = 0;
      reason[v] = nullptr;
      polarity[v] = trail[i].negated();
      order.insert(v);
    }
    trail.resize(trail_lim[lvl]);
    trail_lim.resize(lvl);
    qhead = trail.size();
  }

  Clause* propagate() {
    Clause* confl = nullptr;
    while (qhead < trail.size()) {
      Lit p = trail[qhead++];
      Lit false_lit = ~p;
      auto& ws = watches[p.code()];
      ++stats.propagations;
      std::size_t i = 0, j = 0, n = ws.size();
      while (i < n) {
        Watcher w = ws[i++];
        if (w.clause->deleted) continue;
        if (value(w.blocker) > 0) {
          ws[j++] = w;
          continue;
        }
        auto& lits = w.clause->lits;
        if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
        Lit first = lits[0];
        if (first != w.blocker && value(first) > 0) {
          ws[j++] = {w.clause, first};
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k) {
          if (value(lits[k]) >= 0) {
            std::swap(lits[1], lits[k]);
            watches[(~lits[1]).code()].push_back({w.clause, first});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = {w.clause, first};
        if (value(first) < 0) {
          confl = w.clause;
          qhead = trail.size();
          while (i < n) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.clause);
        }
      }
      ws.resize(j);
      if (confl) break;
    }
    return confl;
  }

  void bump_var(Var v) {
    if ((activity[v] += var_inc) > 1e100) {
      for (Var u = 1; u <= nvars; ++u) activity[u] *= 1e-100;
      var_inc *= 1e-100;
    }
    order.increased(v);
  }

  void bump_clause(Clause* c) {
    if ((c->activity += cla_inc) > 1e20) {
      for (auto& l : learnts) l->activity *= 1e-20;
      cla_inc *= 1e-20;
    }
  }

  std::uint32_t compute_lbd(const std::vector<Lit>& lits) {
    std::vector<int> levels;
    levels.reserve(lits.size());
    for (Lit l : lits) levels.push_back(level[l.var()]);
    std::sort(levels.begin(), levels.end());
    return static_cast<std::uint32_t>(std::unique(levels.begin(), levels.end()) - levels.begin());
  }

  // First-UIP learning with local minimization.
  void analyze(Clause* confl, std::vector<Lit>& out, int& bt_level) {
    out.clear();
    out.push_back(Lit());
    int path = 0;
    Lit p;
    bool have_p = false;
    std::size_t idx = trail.size();
    do {
      if (confl->learnt) bump_clause(confl);
      for (std::size_t k = have_p ? 1 : 0; k < confl->lits.size(); ++k) {
        Lit q = confl->lits[k];
        Var v = q.var();
        if (!seen[v] && level[v] > 0) {
          seen[v] = 1;
          bump_var(v);
          if (level[v] >= decision_level())
            ++path;
          else
            out.push_back(q);
        }
      }
      while (!seen[trail[--idx].var()]) {
      }
      p = trail[idx];
      have_p = true;
      confl = reason[p.var()];
      seen[p.var()] = 0;
      --path;
      if (path > 0) {
        // reason clauses keep the implied literal first
        if (confl->lits[0] != p) {
          auto it = std::find(confl->lits.begin(), confl->lits.end(), p);
          std::iter_swap(confl->lits.begin(), it);
        }
      }
    } while (path > 0);
    out[0] = ~p;

    std::vector<Lit> minimized;
    minimized.push_back(out[0]);
    for (std::size_t k = 1; k < out.size(); ++k) {
      Clause* r = reason[out[k].var()];
      bool redundant = r != nullptr;
      if (r) {
        for (Lit q : r->lits) {
          if (q.var() == out[k].var()) continue;
          if (!seen[q.var()] && level[q.var()] > 0) {
            redundant = false;
            break;
          }
        }
      }
      if (!redundant) minimized.push_back(out[k]);
    }
    for (std::size_t k = 1; k < out.size(); ++k) seen[out[k].var()] = 0;
    out.swap(minimized);

    if (out.size() == 1) {
      bt_level = 0;
    } else {
      std::size_t max_i = 1;
      for (std::size_t k = 2; k < out.size(); ++k)
        if (level[out[k].var()] > level[out[max_i].var()]) max_i = k;
      std::swap(out[1], out[max_i]);
      bt_level = level[out[1].var()];
    }
  }

  // Collects the assumptions responsible for `p` being false.
  void analyze_final(Lit p) {
    failed.clear();
    failed.push_back(p);
    if (decision_level() == 0) return;
    seen[p.var()] = 1;
    for (std::size_t i = trail.size(); i-- > trail_lim[0];) {
      Var x = trail[i].var();
      if (!seen[x]) continue;
      if (reason[x] == nullptr) {
        // Decisions below the assumption level are assumptions; this
        // includes ~p when both polarities were assumed.
        failed.push_back(trail[i]);
      } else {
        for (Lit q : reason[x]->lits)
          if (q.var() != x && level[q.var()] > 0) seen[q.var()] = 1;
      }
      seen[x] = 0;
    }
    seen[p.var()] = 0;
  }

  bool locked(const Clause* c) const {
    Lit l = c->lits[0];
    return value(l) > 0 && reason[l.var()] == c;
  }

  void purge_watches() {
    for (auto& ws : watches)
      ws.erase(std::remove_if(ws.begin(), ws.end(), [](const Watcher& w) { return w.clause->deleted; }),
               ws.end());
  }

  void reduce_db() {
    ++stats.reductions;
    std::vector<Clause*> cand;
    for (auto& c : learnts)
      if (!c->deleted && c->lbd > 2 && c->lits.size() > 2 && !locked(c.get())) cand.push_back(c.get());
    std::sort(cand.begin(), cand.end(), [](const Clause* a, const Clause* b) {
      if (a->lbd != b->lbd) return a->lbd > b->lbd;
      return a->activity < b->activity;
    });
    for (std::size_t k = 0; k < cand.size() / 2; ++k) cand[k]->deleted = true;
    purge_watches();
    learnts.erase(std::remove_if(learnts.begin(), learnts.end(), [](auto& c) { return c->deleted; }),
                  learnts.end());
    max_learnts = std::min(max_learnts * cfg.learnt_growth, learnt_cap);
  }

  Var pick_branch() {
    while (!order.empty()) {
      Var v = order.pop();
      if (assigns[v] == 0) return v;
    }
    return 0;
  }

  bool past_deadline() const {
    return deadline && std::chrono::steady_clock::now() >= *deadline;
  }

  SearchResult search(int nof_conflicts) {
    int conflicts_here = 0;
    std::vector<Lit> learnt;
    for (;;) {
      Clause* confl = propagate();
      if (confl) {
        ++stats.conflicts;
        ++conflicts_here;
        if (decision_level() == 0) {
          ok = false;
          failed.clear();
          return SearchResult::Unsat;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], nullptr);
        } else {
          auto c = std::make_unique<Clause>();
          c->lits = learnt;
          c->learnt = true;
          c->lbd = compute_lbd(learnt);
          Clause* raw = c.get();
          learnts.push_back(std::move(c));
          attach(raw);
          bump_clause(raw);
          enqueue(learnt[0], raw);
        }
        var_inc /= cfg.var_decay;
        cla_inc /= cfg.clause_decay;
        if ((stats.conflicts & 127) == 0 && past_deadline()) {
          cancel_until(0);
          return SearchResult::Timeout;
        }
        continue;
      }
      if (nof_conflicts >= 0 && conflicts_here >= nof_conflicts) {
        cancel_until(0);
        return SearchResult::Restart;
      }
      if (static_cast<double>(learnts.size()) >= max_learnts + static_cast<double>(trail.size())) reduce_db();

      Lit next;
      bool have_next = false;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        Lit p = assumptions[decision_level()];
        if (value(p) > 0) {
          trail_lim.push_back(trail.size());
        } else if (value(p) < 0) {
          analyze_final(p);
          return SearchResult::Unsat;
        } else {
          next = p;
          have_next = true;
          break;
        }
      }
      if (!have_next) {
        ++stats.decisions;
        if ((stats.decisions & 1023) == 0 && past_deadline()) {
          cancel_until(0);
          return SearchResult::Timeout;
        }
        Var v = pick_branch();
        if (v == 0) return SearchResult::Sat;
        next = Lit(v, polarity[v]);
      }
      trail_lim.push_back(trail.size());
      enqueue(next, nullptr);
    }
  }

  SolveOutcome solve(std::span<const Lit> assume) {
    ++stats.solves;
    SolveOutcome out;
    for (Lit l : assume) check_lit(l);
    if (!ok) {
      out.status = Status::Unsat;
      return out;
    }
    assumptions.assign(assume.begin(), assume.end());
    failed.clear();
    if (max_learnts == 0) {
      max_learnts = std::max<double>(cfg.min_learnts, static_cast<double>(originals.size()) / 3.0);
      learnt_cap = max_learnts * cfg.learnt_growth_cap;
    }
    SearchResult r = SearchResult::Restart;
    for (int round = 0; r == SearchResult::Restart; ++round) {
      int budget = static_cast<int>(luby(2, round) * cfg.restart_base);
      r = search(budget);
      if (r == SearchResult::Restart) ++stats.restarts;
    }
    if (r == SearchResult::Sat) {
      out.status = Status::Sat;
      out.model.assign(nvars + 1, false);
      for (Var v = 1; v <= nvars; ++v) out.model[v] = assigns[v] > 0;
    } else if (r == SearchResult::Unsat) {
      out.status = Status::Unsat;
      out.failed_assumptions = failed;
    } else {
      out.status = Status::Unknown;
    }
    cancel_until(0);
    return out;
  }

  bool add_clause(std::span<const Lit> in) {
    for (Lit l : in) check_lit(l);
    if (!ok) return false;
    cancel_until(0);
    std::vector<Lit> lits(in.begin(), in.end());
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::size_t j = 0;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == ~lits[i]) return true;  // tautology
      LBool v = value(lits[i]);
      if (v > 0) return true;
      if (v == 0) lits[j++] = lits[i];
    }
    lits.resize(j);
    if (lits.empty()) {
      ok = false;
      return false;
    }
    if (lits.size() == 1) {
      enqueue(lits[0], nullptr);
      if (propagate()) ok = false;
      return ok;
    }
    auto c = std::make_unique<Clause>();
    c->lits = std::move(lits);
    Clause* raw = c.get();
    originals.push_back(std::move(c));
    attach(raw);
    return true;
  }

  void simplify() {
    ++stats.simplifications;
    if (!ok) return;
    cancel_until(0);
    if (propagate()) {
      ok = false;
      return;
    }
    for (Lit l : trail) reason[l.var()] = nullptr;
    auto satisfied = [&](const Clause& c) {
      return std::any_of(c.lits.begin(), c.lits.end(), [&](Lit l) { return value(l) > 0; });
    };
    bool any = false;
    for (auto* list : {&originals, &learnts})
      for (auto& c : *list)
        if (satisfied(*c)) c->deleted = any = true;
    if (!any) return;
    purge_watches();
    for (auto* list : {&originals, &learnts})
      list->erase(std::remove_if(list->begin(), list->end(), [](auto& c) { return c->deleted; }),
                  list->end());
  }
};

Solver::Solver(SolverConfig cfg) : impl_(std::make_unique<Impl>()) { impl_->cfg = cfg; }
Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

Var Solver::new_var() { return impl_->new_var(); }
std::uint32_t Solver::num_vars() const { return impl_->nvars; }
std::size_t Solver::num_clauses() const { return impl_->originals.size(); }
std::size_t Solver::num_learnts() const { return impl_->learnts.size(); }
bool Solver::add_clause(std::span<const Lit> clause) { return impl_->add_clause(clause); }
SolveOutcome Solver::solve(std::span<const Lit> assumptions) { return impl_->solve(assumptions); }
void Solver::simplify() { impl_->simplify(); }
void Solver::set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) {
  impl_->deadline = deadline;
}
bool Solver::okay() const { return impl_->ok; }
const SolverStats& Solver::stats() const { return impl_->stats; }

std::optional<bool> Solver::fixed_value(Lit l) const {
  impl_->check_lit(l);
  if (impl_->level[l.var()] != 0) return std::nullopt;
  LBool v = impl_->value(l);
  if (v == 0) return std::nullopt;
  return v > 0;
}

void Solver::write_dimacs(std::ostream& os) const {
  const auto& s = *impl_;
  if (!s.ok) {
    os << "p cnf " << s.nvars << " 1\n0\n";
    return;
  }
  std::size_t units = s.trail_lim.empty() ? s.trail.size() : s.trail_lim[0];
  os << "p cnf " << s.nvars << ' ' << s.originals.size() + units << '\n';
  for (std::size_t i = 0; i < units; ++i) os << s.trail[i].to_dimacs() << " 0\n";
  for (auto& c : s.originals) {
    for (Lit l : c->lits) os << l.to_dimacs() << ' ';
    os << "0\n";
  }
}

}  // namespace slotic3::sat
