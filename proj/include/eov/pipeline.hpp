#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eov/core.hpp"
#include "eov/depgraph.hpp"
#include "eov/policy.hpp"
#include "eov/workload.hpp"

namespace eov {

/// Rejected configurations exit the simulator before it starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  std::string policy = "sharp";
  std::uint32_t block_size = 200;
  std::uint64_t block_timeout = 0;  // 0 derives 2 * block_size * 1000 / rate
  std::uint32_t max_span = 10;
  std::uint32_t request_rate = 700;  // transactions per 1000 ticks
  std::uint64_t client_delay = 0;
  std::uint64_t read_interval = 0;
  std::uint64_t validation_cost = 1;  // ticks per transaction
  WorkloadSpec workload;
  std::uint64_t seed = 1;
  ReachMode reach = ReachMode::Bloom;
  std::uint64_t run_length = 10000;
  std::vector<std::pair<Key, Value>> extra_preload;  // hand-written traces

  std::uint64_t effective_timeout() const;
  void validate() const;
};

struct HistSummary {
  std::uint64_t count = 0;
  double mean = 0;
  std::uint64_t p50 = 0, p90 = 0, p99 = 0, max = 0;
};

class Histogram {
 public:
  void add(std::uint64_t v) { values_.push_back(v); }
  HistSummary summary() const;

 private:
  std::vector<std::uint64_t> values_;
};

struct Metrics {
  std::uint64_t submitted = 0;
  std::uint64_t app_errors = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t in_ledger = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted_early = 0;
  std::uint64_t aborted_unreorderable = 0;
  std::uint64_t aborted_stale_span = 0;
  std::uint64_t aborted_validation = 0;
  std::uint64_t aborted_false_positive = 0;
  std::uint64_t resimulations = 0;
  std::uint64_t duration_ticks = 0;
  double raw_throughput = 0;        // in-ledger txns per 1000 ticks
  double effective_throughput = 0;  // committed txns per 1000 ticks
  Histogram pending_wait_ticks;     // arrival to block formation
  Histogram validation_ticks;       // block formation to commit
  Histogram e2e_ticks;              // submission to block commit
  Histogram admit_us;               // wall-clock arrival processing
  Histogram reorder_us;             // wall-clock block formation
  DepGraphStats graph;              // zeroes unless the policy keeps a graph

  std::uint64_t aborted_total() const {
    return aborted_early + aborted_unreorderable + aborted_stale_span +
           aborted_validation + aborted_false_positive;
  }
};

struct Ledger {
  std::vector<Block> blocks;
  std::map<TxnId, Transaction> txns;  // everything that reached the orderer
  std::vector<std::pair<TxnId, TxnStatus>> rejected;  // not included in any block

  std::vector<Transaction> committed_in_order() const;
};

struct RunResult {
  SimConfig cfg;
  Ledger ledger;
  Metrics metrics;
  std::string final_state;
};

/// Total order of the consensus stream: ascending (arrival tick, id).
std::vector<TxnId> consensus_stream(std::vector<std::pair<std::uint64_t, TxnId>> arrivals);

struct AuditHooks {
  // Decision is TxnStatus::Pending for admitted transactions.
  std::function<void(const Transaction&, TxnStatus, const DepGraph*)> on_arrival_decision;
  std::function<void(std::uint32_t, const std::vector<Transaction>&, const DepGraph*)>
      on_block_formed;
};

RunResult run(const SimConfig& cfg);
RunResult run_with_trace(const SimConfig& cfg, const Trace& trace,
                         const AuditHooks* hooks = nullptr);

}  // namespace eov
