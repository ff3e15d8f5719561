#pragma once

#include <array>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "eov/core.hpp"

namespace eov {

enum class ReachMode : std::uint8_t { Bloom, Exact };

struct BloomParams {
  std::uint32_t bits = 65536;  // per filter
  std::uint32_t hashes = 4;    // double hashing off two seeded 64-bit hashes
  std::uint64_t seed1 = 0x9e3779b97f4a7c15ULL;
  std::uint64_t seed2 = 0xbf58476d1ce4e5b9ULL;
};

/// Graph-global relay state for the two-filter windowing scheme. One slot is
/// the tester (older anchor), the other collects since the newer anchor. When
/// the earliest committed block in the graph passes the young anchor, the
/// tester slot is emptied, re-anchored at the current block, and roles swap.
/// Nodes catch up lazily via the epoch counter.
class RelayClock {
 public:
  std::uint64_t epoch() const { return epoch_; }
  int tester_slot() const { return tester_; }
  std::uint32_t young_anchor() const { return anchors_[1 - tester_]; }

  /// Called when `earliest_committed` (block C) advanced; relays if C passed
  /// the young anchor. `next_block` becomes the emptied slot's anchor.
  void maybe_relay(std::uint32_t earliest_committed, std::uint32_t next_block) {
    if (earliest_committed > anchors_[1 - tester_]) {
      anchors_[tester_] = next_block;
      tester_ = 1 - tester_;
      ++epoch_;
    }
  }

 private:
  std::uint64_t epoch_ = 0;
  int tester_ = 0;
  std::array<std::uint32_t, 2> anchors_ = {0, 0};
};

/// Per-node set of transactions that can reach the node (itself included).
/// Exact mode stores ids and never errs; Bloom mode keeps two relayed bit
/// vectors and may report false positives but never false negatives.
class ReachFilter {
 public:
  ReachFilter() = default;
  ReachFilter(ReachMode mode, const BloomParams& params);

  void insert(TxnId id, const RelayClock& clock);
  bool may_contain(TxnId id, const RelayClock& clock) const;
  void merge(const ReachFilter& other, const RelayClock& clock);

  ReachMode mode() const { return mode_; }
  bool contains_exact(TxnId id) const { return exact_.count(id) > 0; }
  std::size_t exact_size() const { return exact_.size(); }

 private:
  void sync(const RelayClock& clock) const;
  void set_bits(int slot, TxnId id);
  bool test_bits(int slot, TxnId id) const;

  ReachMode mode_ = ReachMode::Exact;
  BloomParams params_;
  std::unordered_set<TxnId> exact_;
  mutable std::array<std::vector<std::uint64_t>, 2> slots_;
  mutable std::uint64_t epoch_ = 0;
};

}  // namespace eov
