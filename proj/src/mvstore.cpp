#include "eov/mvstore.hpp"

#include <algorithm>
#include <sstream>

namespace eov {

SnapshotHandle& SnapshotHandle::operator=(SnapshotHandle&& o) noexcept {
  if (this != &o) {
    release();
    store_ = o.store_;
    block_ = o.block_;
    o.store_ = nullptr;
  }
  return *this;
}

void SnapshotHandle::release() {
  if (store_) {
    store_->release_ref(block_);
    store_ = nullptr;
  }
}

MvStore::MvStore() { snapshots_[0] = 0; }

void MvStore::preload(const std::vector<std::pair<Key, Value>>& entries) {
  std::unique_lock lock(mu_);
  if (latest_ != 0) throw ContractViolation("preload after blocks were applied");
  std::uint32_t pos = 1;
  for (const auto& [key, value] : entries) {
    chains_[key].push_back({Version{0, pos++}, value});
  }
}

SnapshotHandle MvStore::apply_block(std::uint32_t block_number,
                                    const std::vector<CommitEffect>& effects) {
  std::unique_lock lock(mu_);
  if (block_number != latest_ + 1) {
    throw ContractViolation("apply_block: out-of-order block " +
                            std::to_string(block_number));
  }
  for (const auto& effect : effects) {
    for (const auto& [key, value] : *effect.writes) {
      auto& chain = chains_[key];
      Version ver{block_number, effect.pos};
      if (!chain.empty() && !(chain.back().first < ver)) {
        throw ContractViolation("apply_block: non-increasing version for " + key);
      }
      chain.push_back({ver, value});
    }
  }
  latest_ = block_number;
  snapshots_[block_number] += 1;
  return SnapshotHandle(this, block_number);
}

std::optional<std::pair<Version, Value>> MvStore::read_at_block(std::uint32_t block,
                                                                const Key& key) const {
  auto it = chains_.find(key);
  if (it == chains_.end()) return std::nullopt;
  const auto& chain = it->second;
  // Latest version with ver.block <= block, i.e. ver < (block+1, 0).
  auto pos = std::upper_bound(chain.begin(), chain.end(), block,
                              [](std::uint32_t b, const auto& entry) {
                                return b < entry.first.block;
                              });
  if (pos == chain.begin()) return std::nullopt;
  return *std::prev(pos);
}

std::optional<std::pair<Version, Value>> MvStore::read_at(const SnapshotHandle& handle,
                                                          const Key& key) const {
  std::shared_lock lock(mu_);
  auto it = snapshots_.find(handle.block());
  if (!handle.valid() || it == snapshots_.end() || it->second <= 0) {
    throw std::runtime_error("read_at: stale snapshot handle");
  }
  return read_at_block(handle.block(), key);
}

SnapshotHandle MvStore::acquire(std::uint32_t block_number) {
  std::unique_lock lock(mu_);
  auto it = snapshots_.find(block_number);
  if (it == snapshots_.end()) {
    throw std::runtime_error("acquire: snapshot " + std::to_string(block_number) +
                             " not available");
  }
  it->second += 1;
  return SnapshotHandle(this, block_number);
}

std::uint32_t MvStore::latest_block() const {
  std::shared_lock lock(mu_);
  return latest_;
}

SnapshotHandle MvStore::acquire_latest() {
  std::unique_lock lock(mu_);
  snapshots_[latest_] += 1;
  return SnapshotHandle(this, latest_);
}

std::optional<std::pair<Version, Value>> MvStore::read_latest(const Key& key) const {
  std::shared_lock lock(mu_);
  return read_at_block(latest_, key);
}

void MvStore::release_ref(std::uint32_t block) {
  std::unique_lock lock(mu_);
  auto it = snapshots_.find(block);
  if (it != snapshots_.end() && it->second > 0) it->second -= 1;
}

std::size_t MvStore::prune_snapshots(std::uint32_t min_live_block) {
  std::unique_lock lock(mu_);
  std::size_t pruned = 0;
  for (auto it = snapshots_.begin(); it != snapshots_.end();) {
    if (it->first < min_live_block && it->second == 0 && it->first != latest_) {
      it = snapshots_.erase(it);
      ++pruned;
    } else {
      ++it;
    }
  }
  return pruned;
}

std::size_t MvStore::snapshot_count() const {
  std::shared_lock lock(mu_);
  return snapshots_.size();
}

std::string MvStore::dump() const {
  std::shared_lock lock(mu_);
  std::ostringstream out;
  for (const auto& [key, chain] : chains_) {
    if (chain.empty()) continue;
    const auto& [ver, value] = chain.back();
    out << key << '\t' << ver.str() << '\t' << value << '\n';
  }
  return out.str();
}

}  // namespace eov
