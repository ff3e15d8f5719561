#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "eov/access_index.hpp"
#include "eov/core.hpp"
#include "eov/reach_filter.hpp"

namespace eov {

enum class AdmitResult : std::uint8_t {
  Reorderable,
  AbortedUnreorderable,
  AbortedStaleSpan,
  AbortedFalsePositive,
};

namespace edge {
// Edge kind masks, named after the resolution category that created them.
inline constexpr std::uint8_t kWw = 1;    // write-write (committed writer chains, restored ww)
inline constexpr std::uint8_t kWr = 2;    // n-wr reads-from
inline constexpr std::uint8_t kRw = 4;    // reader precedes this writer
inline constexpr std::uint8_t kAnti = 8;  // anti-rw into a concurrent writer
}  // namespace edge

struct DepGraphConfig {
  std::uint32_t max_span = 10;
  ReachMode reach = ReachMode::Bloom;
  BloomParams bloom;
};

struct DepGraphStats {
  std::uint64_t admitted = 0;
  std::uint64_t aborted_unreorderable = 0;
  std::uint64_t aborted_stale_span = 0;
  std::uint64_t aborted_false_positive = 0;
  std::uint64_t cycle_tests = 0;          // (pred, succ) membership tests
  std::uint64_t traversals_skipped = 0;   // admissions with empty successor set
  std::uint64_t nodes_traversed = 0;      // reachability-update visits
  std::uint64_t ww_edges_restored = 0;
  std::uint64_t restore_sweep_visits = 0;
  std::uint64_t pruned_nodes = 0;
  std::size_t max_nodes = 0;
};

struct TxnNode {
  TxnId id = 0;
  ReachFilter anti_reachable;              // transactions that can reach this node
  std::map<TxnId, std::uint8_t> succ;      // immediate successors -> kind mask
  std::uint32_t age = 0;                   // latest block among transactions reaching this node
  bool committed = false;
  SeqNum commit_seq;
  std::uint32_t arrival_index = 0;         // consensus arrival order
  std::vector<std::pair<Key, Version>> reads;
  std::vector<Key> writes;
};

struct Resolution {
  std::vector<TxnId> ww;       // last committed writer per written key
  std::vector<TxnId> n_wr;     // committed writer of each read version
  std::vector<TxnId> rw;       // readers that must precede this writer
  std::vector<TxnId> anti_rw;  // writers this transaction must precede
  std::vector<TxnId> pred() const;
  const std::vector<TxnId>& succ() const { return anti_rw; }
};

/// Dependency graph over committed and pending transactions. Admission
/// aborts unreorderable arrivals, block formation emits an abort-free
/// topological order and restores same-key write-write edges, and pruning
/// drops committed nodes no future transaction can form a cycle with.
/// All mutating calls belong to a single logical orderer task.
class DepGraph {
 public:
  explicit DepGraph(DepGraphConfig cfg = {});

  /// Dependency resolution over the access indices. Pending write-write
  /// pairs are deliberately excluded; hits on pruned nodes are dropped.
  Resolution resolve_dependencies(const Transaction& t) const;

  /// Arrival hook: stale-span check, cycle test over (pred, succ) pairs,
  /// then insertion plus the reachability update.
  AdmitResult admit_transaction(const Transaction& t);

  /// Topologically sorts the pending set by reachability (ties by arrival
  /// order), restores ww dependencies along that order, and clears the
  /// pending set. Every returned transaction survives validation.
  std::vector<TxnId> form_block();

  /// Moves the block's accesses into the committed indices in block order
  /// and finalizes commit sequence numbers.
  void commit_block(std::uint32_t block_number, const std::vector<TxnId>& order);

  /// Removes committed nodes whose age fell below next_block - max_span.
  std::vector<TxnId> prune();

  std::uint32_t next_block() const { return next_block_; }
  std::uint32_t stale_span_threshold() const;  // H, as a signed comparison helper
  const TxnNode* find(TxnId id) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  const std::vector<TxnId>& pending() const { return pending_; }
  std::uint32_t earliest_live_committed() const;

  /// True path test over live edges (the exact reference semantics).
  bool reaches(TxnId from, TxnId to) const;
  bool is_acyclic() const;

  template <typename Fn>
  void for_each_node(Fn&& fn) const {
    for (const auto& [id, node] : nodes_) fn(node);
  }

  const AccessIndices& indices() const { return idx_; }
  CommittedIndex& cw() { return idx_.cw; }
  CommittedIndex& cr() { return idx_.cr; }
  const RelayClock& relay() const { return relay_; }
  const DepGraphConfig& config() const { return cfg_; }
  const DepGraphStats& stats() const { return stats_; }

  std::string dot_dump() const;

 private:
  ReachFilter make_filter() const;
  void update_reachability(TxnNode& node, const Resolution& res);
  void restore_ww(const std::vector<TxnId>& seq);
  bool pair_connected(TxnId t1, TxnId t2) const;

  DepGraphConfig cfg_;
  AccessIndices idx_;
  RelayClock relay_;
  std::unordered_map<TxnId, TxnNode> nodes_;
  std::unordered_map<TxnId, Transaction> pending_txns_;
  std::vector<TxnId> pending_;  // arrival order
  std::uint32_t next_block_ = 1;
  std::uint32_t arrival_counter_ = 0;
  std::map<std::uint32_t, std::uint32_t> live_per_block_;  // commit block -> live count
  // Min-priority queue on (age, id); entries go stale when ages grow and
  // are re-checked lazily on pop.
  std::priority_queue<std::pair<std::uint32_t, TxnId>,
                      std::vector<std::pair<std::uint32_t, TxnId>>,
                      std::greater<>>
      age_queue_;
  DepGraphStats stats_;
};

}  // namespace eov
