#pragma once

#include <cstdint>
#include <string>

#include "eov/core.hpp"
#include "eov/mvstore.hpp"
#include "eov/workload.hpp"

namespace eov {

struct Endorsement {
  Transaction txn;                 // readset/writeset filled, start_ts set
  std::uint32_t sim_block = 0;     // snapshot the first read was served from
  std::uint32_t sim_block_last = 0;  // snapshot of the last read
  std::uint64_t finish_tick = 0;
  bool app_error = false;
  std::string error;

  bool read_across_blocks() const { return sim_block != sim_block_last; }
};

/// Contract simulation against a single pinned block snapshot. All reads
/// observe the snapshot current when the simulation starts; logical time
/// advances by `read_interval` per read; writes stay buffered.
Endorsement simulate(const Proposal& p, MvStore& store, std::uint64_t now,
                     std::uint64_t read_interval);

/// Arrival tick at the orderer; ties there are broken by proposal id.
std::uint64_t dispatch_to_ordering(const Endorsement& e, std::uint64_t client_delay);

}  // namespace eov
