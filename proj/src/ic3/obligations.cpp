// po_handling slot: ordering of the proof-obligation worklist.
#include <algorithm>
#include <limits>

#include "slotic3/ic3.hpp"

namespace slotic3::ic3 {

ObligationQueue::ObligationQueue(SlotPolicy policy) : policy_(std::move(policy)) {
  if (policy_.slot != SlotId::PoHandling) throw PolicyError("obligation queue needs a po_handling policy");
}

// Heap comparator: true when `a` should be popped after `b`.
bool ObligationQueue::after(const Entry& a, const Entry& b) {
  if (a.k0 != b.k0) return a.k0 > b.k0;
  if (a.k1 != b.k1) return a.k1 > b.k1;
  if (a.k2 != b.k2) return a.k2 > b.k2;
  return a.k3 > b.k3;
}

void ObligationQueue::push(ProofObligation ob) {
  ob.seq = next_seq_++;
  Entry e{0, 0, 0, ob.seq, std::move(ob)};
  const auto& o = e.ob;
  const auto size = static_cast<double>(o.cube.size());
  if (policy_.variant == "best_first") {
    e.k0 = static_cast<double>(o.frame);
    e.k1 = static_cast<double>(o.depth) + policy_.param("age_weight") * static_cast<double>(o.age);
    e.k2 = size;
  } else if (policy_.variant == "min_frame_then_size") {
    e.k0 = static_cast<double>(o.frame);
    e.k1 = size;
  } else if (policy_.variant == "dfs") {
    e.k3 = std::numeric_limits<std::uint64_t>::max() - o.seq;
  } else {
    throw PolicyError("unsupported po_handling variant " + policy_.variant);
  }
  heap_.push_back(std::move(e));
  std::push_heap(heap_.begin(), heap_.end(), after);
}

ProofObligation ObligationQueue::pop() {
  if (heap_.empty()) throw std::logic_error("pop from empty obligation queue");
  std::pop_heap(heap_.begin(), heap_.end(), after);
  auto ob = std::move(heap_.back().ob);
  heap_.pop_back();
  return ob;
}

ProofObligation select_obligation(ObligationQueue& q) { return q.pop(); }

}  // namespace slotic3::ic3
