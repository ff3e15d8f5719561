#include "eov/execution.hpp"

namespace eov {

Endorsement simulate(const Proposal& p, MvStore& store, std::uint64_t now,
                     std::uint64_t read_interval) {
  Endorsement e;
  e.txn.id = p.id;
  SnapshotHandle snapshot = store.acquire_latest();
  e.sim_block = snapshot.block();
  e.sim_block_last = snapshot.block();
  e.txn.start_ts = SeqNum::snapshot_of(snapshot.block());

  const std::uint64_t gap = p.raw_read_gap.value_or(read_interval);
  const auto keys = read_plan(p);
  std::map<Key, std::optional<Value>> values;
  for (const Key& key : keys) {
    auto hit = store.read_at(snapshot, key);
    if (hit) {
      e.txn.readset[key] = hit->first;
      values[key] = hit->second;
    } else {
      values[key] = std::nullopt;
    }
  }
  e.finish_tick = now + keys.size() * gap;

  auto result = apply_contract(p, values);
  if (result.app_error) {
    e.app_error = true;
    e.error = result.error;
    return e;
  }
  e.txn.writeset = std::move(result.writes);
  return e;
}

std::uint64_t dispatch_to_ordering(const Endorsement& e, std::uint64_t client_delay) {
  return e.finish_tick + client_delay;
}

}  // namespace eov
