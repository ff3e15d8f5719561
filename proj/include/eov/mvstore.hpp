#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "eov/core.hpp"

namespace eov {

class MvStore;

/// Pinned view of the state after one block committed. While any handle
/// for a block is alive the snapshot cannot be pruned. Move-only RAII.
class SnapshotHandle {
 public:
  SnapshotHandle() = default;
  SnapshotHandle(SnapshotHandle&& o) noexcept : store_(o.store_), block_(o.block_) {
    o.store_ = nullptr;
  }
  SnapshotHandle& operator=(SnapshotHandle&& o) noexcept;
  SnapshotHandle(const SnapshotHandle&) = delete;
  SnapshotHandle& operator=(const SnapshotHandle&) = delete;
  ~SnapshotHandle() { release(); }

  std::uint32_t block() const { return block_; }
  bool valid() const { return store_ != nullptr; }
  void release();

 private:
  friend class MvStore;
  SnapshotHandle(MvStore* s, std::uint32_t b) : store_(s), block_(b) {}
  MvStore* store_ = nullptr;
  std::uint32_t block_ = 0;
};

/// Multi-versioned key-value state with named block snapshots. Entries form
/// an append-only, strictly version-increasing chain per key. Reads through
/// a handle observe exactly the state after its block committed; apply_block
/// is serialized while readers proceed concurrently.
class MvStore {
 public:
  struct CommitEffect {
    std::uint32_t pos;  // 1-based position within the block
    const std::map<Key, Value>* writes;
  };

  MvStore();

  /// Installs genesis entries with versions (0, k) in load order, k from 1.
  void preload(const std::vector<std::pair<Key, Value>>& entries);

  /// Applies the committed writes of `block_number` (given in block order)
  /// and registers the block's snapshot. Blocks must arrive in order.
  SnapshotHandle apply_block(std::uint32_t block_number,
                             const std::vector<CommitEffect>& effects);

  /// Latest entry with version <= (handle.block, max); absent if the key
  /// did not exist by that block. Throws on a released or pruned handle.
  std::optional<std::pair<Version, Value>> read_at(const SnapshotHandle& handle,
                                                   const Key& key) const;

  /// Pins an existing snapshot (throws if it was pruned or never existed).
  SnapshotHandle acquire(std::uint32_t block_number);

  std::uint32_t latest_block() const;
  SnapshotHandle acquire_latest();

  /// Read against the latest applied state without pinning a snapshot.
  std::optional<std::pair<Version, Value>> read_latest(const Key& key) const;

  /// Drops snapshots below `min_live_block` that are unreferenced; the
  /// latest snapshot always survives. Returns how many were pruned.
  std::size_t prune_snapshots(std::uint32_t min_live_block);

  std::size_t snapshot_count() const;

  /// One line per live entry, "key<TAB>block:pos<TAB>value", sorted by key.
  std::string dump() const;

 private:
  friend class SnapshotHandle;
  void release_ref(std::uint32_t block);
  std::optional<std::pair<Version, Value>> read_at_block(std::uint32_t block,
                                                         const Key& key) const;

  mutable std::shared_mutex mu_;
  std::map<Key, std::vector<std::pair<Version, Value>>> chains_;
  std::map<std::uint32_t, int> snapshots_;  // block -> refcount
  std::uint32_t latest_ = 0;
};

}  // namespace eov
