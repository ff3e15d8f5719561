#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eov/core.hpp"
#include "eov/depgraph.hpp"
#include "eov/execution.hpp"
#include "eov/mvstore.hpp"

namespace eov {

/// How the execution phase serves reads for a policy.
enum class ExecMode : std::uint8_t {
  SnapshotPinned,  // all reads from the snapshot current at simulation start
  LatestPerRead,   // each read sees the latest committed state at its tick
  LockedLatest,    // latest state under a read lock; overlapping commits restart
};

enum class ValidateMode : std::uint8_t {
  VersionCheck,  // per-transaction readset staleness test at the peer
  AcceptAll,     // ordering already decided; peers apply what was emitted
};

struct ArrivalOutcome {
  bool admitted = true;
  TxnStatus status = TxnStatus::Pending;
};

struct FormOutcome {
  std::vector<TxnId> order;
  std::vector<std::pair<TxnId, TxnStatus>> aborts;
};

/// A concurrency-control strategy: an arrival hook, a block-formation hook
/// and a validation mode. Driven by the single orderer task.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual const char* name() const = 0;
  virtual ExecMode exec_mode() const = 0;
  virtual ValidateMode validate_mode() const = 0;
  virtual ArrivalOutcome on_arrival(const Transaction& txn, const Endorsement& e) = 0;
  virtual FormOutcome on_block_formation(const std::vector<const Transaction*>& pending,
                                         std::uint32_t block_number) = 0;
  /// The dependency graph, when the policy maintains one.
  virtual const DepGraph* graph() const { return nullptr; }
  virtual DepGraph* mutable_graph() { return nullptr; }
};

struct PolicyConfig {
  std::uint32_t max_span = 10;
  ReachMode reach = ReachMode::Bloom;
  BloomParams bloom;
};

/// Policies: fabric, fabricpp, focc-s, focc-l, sharp. `store` must outlive
/// the policy; fabricpp consults it for committed-state staleness.
std::unique_ptr<Policy> make_policy(const std::string& name, const MvStore& store,
                                    const PolicyConfig& cfg);

/// Sequential version-based validation: a transaction commits iff every
/// readset entry still carries the key's latest version, counting writes
/// committed earlier in the same block.
std::vector<TxnStatus> fabric_validate(std::uint32_t block_number,
                                       const std::vector<const Transaction*>& order,
                                       const MvStore& store);

}  // namespace eov
