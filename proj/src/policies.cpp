#include "eov/policy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "eov/access_index.hpp"

namespace eov {

std::vector<TxnStatus> fabric_validate(std::uint32_t block_number,
                                       const std::vector<const Transaction*>& order,
                                       const MvStore& store) {
  std::vector<TxnStatus> statuses;
  statuses.reserve(order.size());
  std::map<Key, Version> overlay;  // versions installed earlier in this block
  std::uint32_t pos = 1;
  for (const Transaction* txn : order) {
    bool fresh = true;
    for (const auto& [key, version] : txn->readset) {
      auto it = overlay.find(key);
      if (it != overlay.end()) {
        if (it->second != version) {
          fresh = false;
          break;
        }
        continue;
      }
      auto current = store.read_latest(key);
      if (current ? current->first != version : version.block != 0) {
        fresh = false;
        break;
      }
    }
    if (fresh) {
      for (const auto& [key, _] : txn->writeset) {
        overlay[key] = Version{block_number, pos};
      }
      statuses.push_back(TxnStatus::Committed);
    } else {
      statuses.push_back(TxnStatus::AbortedValidation);
    }
    ++pos;
  }
  return statuses;
}

namespace {

std::vector<TxnId> arrival_order(const std::vector<const Transaction*>& pending) {
  std::vector<TxnId> order;
  order.reserve(pending.size());
  for (const auto* t : pending) order.push_back(t->id);
  return order;
}

/// Vanilla baseline: execution holds the read lock (modeled as re-simulation
/// on overlapping commits), ordering is FIFO, validation does the work.
class FabricPolicy final : public Policy {
 public:
  const char* name() const override { return "fabric"; }
  ExecMode exec_mode() const override { return ExecMode::LockedLatest; }
  ValidateMode validate_mode() const override { return ValidateMode::VersionCheck; }
  ArrivalOutcome on_arrival(const Transaction&, const Endorsement&) override {
    return {};
  }
  FormOutcome on_block_formation(const std::vector<const Transaction*>& pending,
                                 std::uint32_t) override {
    return {arrival_order(pending), {}};
  }
};

/// Lock-free execution with early aborts for cross-block readers and an
/// intra-block reordering step that breaks conflict cycles greedily.
class FabricPpPolicy final : public Policy {
 public:
  explicit FabricPpPolicy(const MvStore& store) : store_(store) {}

  const char* name() const override { return "fabricpp"; }
  ExecMode exec_mode() const override { return ExecMode::LatestPerRead; }
  ValidateMode validate_mode() const override { return ValidateMode::VersionCheck; }

  ArrivalOutcome on_arrival(const Transaction&, const Endorsement& e) override {
    if (e.read_across_blocks()) return {false, TxnStatus::AbortedEarly};
    return {};
  }

  FormOutcome on_block_formation(const std::vector<const Transaction*>& pending,
                                 std::uint32_t) override;

 private:
  const MvStore& store_;
};

// Elementary-cycle enumeration (Johnson), capped; used to pick the abort
// victim appearing in the most cycles, the batch-mode profile of this
// reordering step.
class CycleEnumerator {
 public:
  CycleEnumerator(const std::vector<TxnId>& nodes,
                  const std::map<TxnId, std::set<TxnId>>& adj, std::size_t cap)
      : nodes_(nodes), adj_(adj), cap_(cap) {}

  // Per-node membership counts over enumerated cycles; `capped` is set when
  // enumeration stopped early.
  std::map<TxnId, std::size_t> count(bool& capped) {
    for (TxnId start : nodes_) {
      start_ = start;
      blocked_.clear();
      blocked_by_.clear();
      stack_.clear();
      dfs(start);
      if (overflow_) break;
    }
    capped = overflow_;
    return counts_;
  }

 private:
  bool dfs(TxnId v) {
    if (overflow_ || ++steps_ > cap_) {
      overflow_ = true;
      return false;
    }
    bool found = false;
    stack_.push_back(v);
    blocked_.insert(v);
    auto it = adj_.find(v);
    if (it != adj_.end()) {
      for (TxnId w : it->second) {
        if (overflow_) break;
        if (w < start_) continue;  // each cycle is rooted at its minimum node
        if (w == start_) {
          for (TxnId n : stack_) counts_[n]++;
          if (++cycles_ > cap_) overflow_ = true;
          found = true;
        } else if (!blocked_.count(w)) {
          if (dfs(w)) found = true;
        }
      }
    }
    if (found) {
      unblock(v);
    } else if (it != adj_.end()) {
      for (TxnId w : it->second) {
        if (w >= start_) blocked_by_[w].insert(v);
      }
    }
    stack_.pop_back();
    return found;
  }

  void unblock(TxnId v) {
    blocked_.erase(v);
    auto it = blocked_by_.find(v);
    if (it == blocked_by_.end()) return;
    auto deps = std::move(it->second);
    blocked_by_.erase(it);
    for (TxnId w : deps) {
      if (blocked_.count(w)) unblock(w);
    }
  }

  const std::vector<TxnId>& nodes_;
  const std::map<TxnId, std::set<TxnId>>& adj_;
  std::size_t cap_;
  TxnId start_ = 0;
  std::set<TxnId> blocked_;
  std::map<TxnId, std::set<TxnId>> blocked_by_;
  std::vector<TxnId> stack_;
  std::map<TxnId, std::size_t> counts_;
  std::size_t steps_ = 0;
  std::size_t cycles_ = 0;
  bool overflow_ = false;
};

FormOutcome FabricPpPolicy::on_block_formation(
    const std::vector<const Transaction*>& pending, std::uint32_t) {
  FormOutcome out;
  // Transactions whose reads are already stale against committed state can
  // never pass validation; drop them before looking at cycles.
  std::vector<const Transaction*> live;
  for (const auto* t : pending) {
    bool stale = false;
    for (const auto& [key, version] : t->readset) {
      auto current = store_.read_latest(key);
      if (current ? current->first != version : version.block != 0) {
        stale = true;
        break;
      }
    }
    if (stale) {
      out.aborts.push_back({t->id, TxnStatus::AbortedValidation});
    } else {
      live.push_back(t);
    }
  }

  // Intra-block read-write conflict graph: reader precedes writer.
  std::map<Key, std::vector<TxnId>> readers, writers;
  std::map<TxnId, const Transaction*> by_id;
  std::map<TxnId, std::uint32_t> arrival;
  for (std::uint32_t i = 0; i < live.size(); ++i) {
    const auto* t = live[i];
    by_id[t->id] = t;
    arrival[t->id] = i;
    for (const auto& [key, _] : t->readset) readers[key].push_back(t->id);
    for (const auto& [key, _] : t->writeset) writers[key].push_back(t->id);
  }
  std::map<TxnId, std::set<TxnId>> adj;
  std::map<TxnId, std::set<TxnId>> radj;
  for (const auto& [key, rs] : readers) {
    auto wit = writers.find(key);
    if (wit == writers.end()) continue;
    for (TxnId r : rs) {
      for (TxnId w : wit->second) {
        if (r == w) continue;
        adj[r].insert(w);
        radj[w].insert(r);
      }
    }
  }

  std::set<TxnId> alive;
  for (const auto* t : live) alive.insert(t->id);

  auto degree = [&](TxnId id) {
    std::size_t d = 0;
    if (auto it = adj.find(id); it != adj.end()) {
      for (TxnId w : it->second) d += alive.count(w);
    }
    if (auto it = radj.find(id); it != radj.end()) {
      for (TxnId r : it->second) d += alive.count(r);
    }
    return d;
  };

  // Break every cycle: enumerate elementary cycles among the survivors and
  // repeatedly abort the heaviest participant.
  while (true) {
    std::vector<TxnId> nodes(alive.begin(), alive.end());
    std::map<TxnId, std::set<TxnId>> sub;
    for (TxnId v : nodes) {
      if (auto it = adj.find(v); it != adj.end()) {
        for (TxnId w : it->second) {
          if (alive.count(w)) sub[v].insert(w);
        }
      }
    }
    bool capped = false;
    CycleEnumerator enumerator(nodes, sub, 200000);
    auto counts = enumerator.count(capped);
    if (counts.empty() && !capped) break;

    TxnId victim = 0;
    std::size_t best_count = 0;
    std::size_t best_degree = 0;
    std::uint32_t best_arrival = 0;
    bool have = false;
    auto consider = [&](TxnId id, std::size_t cnt) {
      const std::size_t deg = degree(id);
      const std::uint32_t arr = arrival[id];
      if (!have || cnt > best_count || (cnt == best_count && deg > best_degree) ||
          (cnt == best_count && deg == best_degree && arr > best_arrival)) {
        have = true;
        victim = id;
        best_count = cnt;
        best_degree = deg;
        best_arrival = arr;
      }
    };
    if (capped) {
      // Too many cycles to enumerate; fall back to degree.
      for (TxnId id : nodes) consider(id, degree(id) > 0 ? 1 : 0);
      if (best_count == 0) break;
    } else {
      for (const auto& [id, cnt] : counts) consider(id, cnt);
    }
    alive.erase(victim);
    out.aborts.push_back({victim, TxnStatus::AbortedUnreorderable});
  }

  // Kahn over the survivors, arrival order among ready nodes.
  std::map<TxnId, std::size_t> indeg;
  for (TxnId v : alive) indeg[v] = 0;
  for (TxnId v : alive) {
    if (auto it = adj.find(v); it != adj.end()) {
      for (TxnId w : it->second) {
        if (alive.count(w)) indeg[w]++;
      }
    }
  }
  std::set<std::pair<std::uint32_t, TxnId>> ready;
  for (const auto& [v, d] : indeg) {
    if (d == 0) ready.insert({arrival[v], v});
  }
  while (!ready.empty()) {
    auto [_, v] = *ready.begin();
    ready.erase(ready.begin());
    out.order.push_back(v);
    if (auto it = adj.find(v); it != adj.end()) {
      for (TxnId w : it->second) {
        if (alive.count(w) && --indeg[w] == 0) ready.insert({arrival[w], w});
      }
    }
  }
  std::sort(out.aborts.begin(), out.aborts.end());
  return out;
}

/// Standard serializable OCC: concurrent write-write conflicts and dangerous
/// rw structures abort on arrival; block formation keeps the arrival order
/// and the ordering decision is final.
class FoccSPolicy final : public Policy {
 public:
  explicit FoccSPolicy(std::uint32_t flag_window) : flag_window_(flag_window) {}

  const char* name() const override { return "focc-s"; }
  ExecMode exec_mode() const override { return ExecMode::SnapshotPinned; }
  ValidateMode validate_mode() const override { return ValidateMode::AcceptAll; }

  ArrivalOutcome on_arrival(const Transaction& t, const Endorsement&) override {
    // Any c-ww: a concurrent committed writer (committed after t's snapshot)
    // or any pending writer of a key t writes.
    for (const auto& [key, _] : t.writeset) {
      if (!idx_.cw.range_from(key, t.start_ts).empty()) {
        return {false, TxnStatus::AbortedUnreorderable};
      }
      if (auto it = idx_.pw.find(key); it != idx_.pw.end() && !it->second.empty()) {
        return {false, TxnStatus::AbortedUnreorderable};
      }
    }

    // Concurrent rw conflicts. Inbound: readers of keys t writes. Outbound:
    // writers of keys t reads; every such conflict present at arrival is an
    // anti-dependency, because those writers all commit before t does.
    bool inbound = false;
    bool outbound_anti = false;
    std::vector<TxnId> outbound_writers;
    for (const auto& [key, _] : t.writeset) {
      if (!idx_.cr.range_from(key, t.start_ts).empty()) inbound = true;
      if (auto it = idx_.pr.find(key); it != idx_.pr.end() && !it->second.empty()) {
        inbound = true;
      }
      if (inbound) break;
    }
    for (const auto& [key, _] : t.readset) {
      for (TxnId w : idx_.cw.range_from(key, t.start_ts)) {
        outbound_anti = true;
        outbound_writers.push_back(w);
      }
      if (auto it = idx_.pw.find(key); it != idx_.pw.end()) {
        for (TxnId w : it->second) {
          outbound_anti = true;
          outbound_writers.push_back(w);
        }
      }
    }
    if (inbound && outbound_anti) return {false, TxnStatus::AbortedUnreorderable};
    // Admitting t hands each of its writers an inbound conflict; abort if
    // that completes someone else's dangerous structure.
    for (TxnId w : outbound_writers) {
      auto it = flags_.find(w);
      if (it != flags_.end() && it->second.outbound_anti) {
        return {false, TxnStatus::AbortedUnreorderable};
      }
    }

    flags_[t.id] = {inbound, outbound_anti};
    for (TxnId w : outbound_writers) flags_[w].inbound = true;
    idx_.add_pending(t);
    pending_txns_.emplace(t.id, t);
    return {};
  }

  FormOutcome on_block_formation(const std::vector<const Transaction*>& pending,
                                 std::uint32_t block_number) override {
    FormOutcome out;
    out.order = arrival_order(pending);
    std::uint32_t pos = 1;
    for (TxnId id : out.order) {
      auto it = pending_txns_.find(id);
      const SeqNum seq{block_number, pos++};
      for (const auto& [key, _] : it->second.readset) idx_.cr.append(key, seq, id);
      for (const auto& [key, _] : it->second.writeset) idx_.cw.append(key, seq, id);
      idx_.remove_pending(it->second);
      pending_txns_.erase(it);
    }
    committed_window_.push_back({block_number, out.order});
    while (committed_window_.size() > flag_window_) {
      for (TxnId id : committed_window_.front().second) flags_.erase(id);
      committed_window_.erase(committed_window_.begin());
    }
    return out;
  }

 private:
  struct RwFlags {
    bool inbound = false;
    bool outbound_anti = false;
  };
  std::uint32_t flag_window_;
  AccessIndices idx_;  // cr records every committed read, not only latest-value reads
  std::map<TxnId, RwFlags> flags_;
  std::map<TxnId, Transaction> pending_txns_;
  std::vector<std::pair<std::uint32_t, std::vector<TxnId>>> committed_window_;
};

/// Batched OCC with sort-based greedy reordering: nothing is filtered on
/// arrival; block formation emits conflict-free transactions round by round
/// and prunes the heaviest conflicting transaction when stuck. Staleness
/// against committed state is left to validation.
class FoccLPolicy final : public Policy {
 public:
  const char* name() const override { return "focc-l"; }
  ExecMode exec_mode() const override { return ExecMode::SnapshotPinned; }
  ValidateMode validate_mode() const override { return ValidateMode::VersionCheck; }

  ArrivalOutcome on_arrival(const Transaction&, const Endorsement&) override {
    return {};
  }

  FormOutcome on_block_formation(const std::vector<const Transaction*>& pending,
                                 std::uint32_t) override {
    FormOutcome out;
    std::map<Key, std::vector<TxnId>> readers, writers;
    std::map<TxnId, std::uint32_t> arrival;
    for (std::uint32_t i = 0; i < pending.size(); ++i) {
      const auto* t = pending[i];
      arrival[t->id] = i;
      for (const auto& [key, _] : t->readset) readers[key].push_back(t->id);
      for (const auto& [key, _] : t->writeset) writers[key].push_back(t->id);
    }
    std::map<TxnId, std::set<TxnId>> adj, radj;
    for (const auto& [key, rs] : readers) {
      auto wit = writers.find(key);
      if (wit == writers.end()) continue;
      for (TxnId r : rs) {
        for (TxnId w : wit->second) {
          if (r == w) continue;
          adj[r].insert(w);
          radj[w].insert(r);
        }
      }
    }
    std::set<TxnId> remaining;
    for (const auto* t : pending) remaining.insert(t->id);
    std::map<TxnId, std::size_t> indeg, degree;
    for (TxnId v : remaining) {
      indeg[v] = 0;
      degree[v] = 0;
    }
    for (TxnId v : remaining) {
      for (TxnId w : adj[v]) {
        indeg[w]++;
        degree[v]++;
        degree[w]++;
      }
    }

    std::set<std::pair<std::uint32_t, TxnId>> ready;
    for (const auto& [v, d] : indeg) {
      if (d == 0) ready.insert({arrival[v], v});
    }
    // Degrees shrink as transactions leave, so victim selection is a linear
    // scan instead of a rescan of the adjacency lists.
    auto drop = [&](TxnId v, bool release_only_successors) {
      remaining.erase(v);
      for (TxnId w : adj[v]) {
        if (!remaining.count(w)) continue;
        degree[w]--;
        if (--indeg[w] == 0) ready.insert({arrival[w], w});
      }
      if (release_only_successors) return;
      for (TxnId w : radj[v]) {
        if (remaining.count(w)) degree[w]--;
      }
    };
    while (!remaining.empty()) {
      if (!ready.empty()) {
        auto [_, v] = *ready.begin();
        ready.erase(ready.begin());
        if (!remaining.count(v)) continue;
        out.order.push_back(v);
        drop(v, true);
        continue;
      }
      // Stuck on a cycle: abort the transaction with the most live
      // conflicts; ties go to the latest arrival.
      TxnId victim = 0;
      std::size_t best = 0;
      std::uint32_t best_arrival = 0;
      bool have = false;
      for (TxnId v : remaining) {
        const std::size_t deg = degree[v];
        if (!have || deg > best || (deg == best && arrival[v] > best_arrival)) {
          have = true;
          victim = v;
          best = deg;
          best_arrival = arrival[v];
        }
      }
      out.aborts.push_back({victim, TxnStatus::AbortedUnreorderable});
      drop(victim, false);
    }
    return out;
  }
};

/// The fine-grained reordering policy: arrivals run the reorderability test
/// against the dependency graph, block formation emits the abort-free
/// topological order, and validation accepts what ordering emitted.
class SharpPolicy final : public Policy {
 public:
  explicit SharpPolicy(const PolicyConfig& cfg)
      : graph_(DepGraphConfig{cfg.max_span, cfg.reach, cfg.bloom}) {}

  const char* name() const override { return "sharp"; }
  ExecMode exec_mode() const override { return ExecMode::SnapshotPinned; }
  ValidateMode validate_mode() const override { return ValidateMode::AcceptAll; }

  ArrivalOutcome on_arrival(const Transaction& t, const Endorsement&) override {
    switch (graph_.admit_transaction(t)) {
      case AdmitResult::Reorderable:
        return {};
      case AdmitResult::AbortedUnreorderable:
        return {false, TxnStatus::AbortedUnreorderable};
      case AdmitResult::AbortedStaleSpan:
        return {false, TxnStatus::AbortedStaleSpan};
      case AdmitResult::AbortedFalsePositive:
        return {false, TxnStatus::AbortedFalsePositive};
    }
    return {};
  }

  FormOutcome on_block_formation(const std::vector<const Transaction*>&,
                                 std::uint32_t block_number) override {
    FormOutcome out;
    out.order = graph_.form_block();
    graph_.commit_block(block_number, out.order);
    graph_.prune();
    return out;
  }

  const DepGraph* graph() const override { return &graph_; }
  DepGraph* mutable_graph() override { return &graph_; }

 private:
  DepGraph graph_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& name, const MvStore& store,
                                    const PolicyConfig& cfg) {
  if (name == "fabric") return std::make_unique<FabricPolicy>();
  if (name == "fabricpp") return std::make_unique<FabricPpPolicy>(store);
  if (name == "focc-s") return std::make_unique<FoccSPolicy>(cfg.max_span);
  if (name == "focc-l") return std::make_unique<FoccLPolicy>();
  if (name == "sharp") return std::make_unique<SharpPolicy>(cfg);
  throw std::runtime_error("unknown policy: " + name);
}

}  // namespace eov
