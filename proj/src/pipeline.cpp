#include "eov/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <queue>

#include "eov/execution.hpp"
#include "eov/mvstore.hpp"

namespace eov {

std::uint64_t SimConfig::effective_timeout() const {
  if (block_timeout > 0) return block_timeout;
  return 2ull * block_size * 1000ull / request_rate;
}

void SimConfig::validate() const {
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  if (max_span < 1) throw ConfigError("max_span must be >= 1");
  if (request_rate < 1) throw ConfigError("request rate must be >= 1");
  if (run_length < block_size) throw ConfigError("run length must be >= block size");
  if (policy != "fabric" && policy != "fabricpp" && policy != "focc-s" &&
      policy != "focc-l" && policy != "sharp") {
    throw ConfigError("unknown policy: " + policy);
  }
  try {
    workload.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

HistSummary Histogram::summary() const {
  HistSummary s;
  if (values_.empty()) return s;
  std::vector<std::uint64_t> sorted = values_;
  std::sort(sorted.begin(), sorted.end());
  s.count = sorted.size();
  double total = 0;
  for (auto v : sorted) total += static_cast<double>(v);
  s.mean = total / static_cast<double>(sorted.size());
  auto at = [&](double q) {
    return sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
  };
  s.p50 = at(0.50);
  s.p90 = at(0.90);
  s.p99 = at(0.99);
  s.max = sorted.back();
  return s;
}

std::vector<Transaction> Ledger::committed_in_order() const {
  std::vector<Transaction> out;
  for (const auto& block : blocks) {
    for (std::size_t i = 0; i < block.txns.size(); ++i) {
      if (block.statuses[i] == TxnStatus::Committed) {
        out.push_back(txns.at(block.txns[i]));
      }
    }
  }
  return out;
}

std::vector<TxnId> consensus_stream(std::vector<std::pair<std::uint64_t, TxnId>> arrivals) {
  std::sort(arrivals.begin(), arrivals.end());
  std::vector<TxnId> out;
  out.reserve(arrivals.size());
  for (const auto& [_, id] : arrivals) out.push_back(id);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_us(Clock::time_point from) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - from).count());
}

enum EventPrio : int {
  kCommitPrio = 0,
  kSubmitPrio = 1,
  kReadPrio = 2,
  kArrivalPrio = 3,
  kTimeoutPrio = 4,
};

struct Event {
  std::uint64_t tick;
  int prio;
  std::uint64_t key;  // block number / proposal index / txn id / generation
  std::uint64_t aux = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.tick, a.prio, a.key, a.aux) > std::tie(b.tick, b.prio, b.key, b.aux);
  }
};

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const Trace& trace, const AuditHooks* hooks)
      : cfg_(cfg), trace_(trace), hooks_(hooks) {}

  RunResult run();

 private:
  struct SimState {
    bool active = false;
    std::uint64_t start_tick = 0;
    std::uint64_t generation = 0;
    std::size_t next_read = 0;
    std::vector<Key> plan;
    std::map<Key, std::optional<Value>> values;
    std::map<Key, Version> readset;
    std::uint32_t first_block = 0;
    std::uint32_t last_block = 0;
  };

  std::uint64_t read_gap(const Proposal& p) const {
    return p.raw_read_gap.value_or(cfg_.read_interval);
  }

  void submit(std::size_t idx, std::uint64_t now);
  void read_step(std::size_t idx, std::uint64_t now, std::uint64_t generation);
  void finish_simulation(const Endorsement& e);
  void arrival(std::size_t endorsement_idx, std::uint64_t now);
  void form_block(std::uint64_t now);
  void commit_block_event(std::uint32_t block_number, std::uint64_t now);
  void timeout(std::uint64_t generation, std::uint64_t now);

  const SimConfig& cfg_;
  const Trace& trace_;
  const AuditHooks* hooks_;

  MvStore store_;
  std::unique_ptr<Policy> policy_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
  std::vector<SimState> sims_;
  std::vector<Endorsement> endorsements_;
  std::map<std::size_t, SnapshotHandle> pins_;  // endorsement index -> pinned snapshot

  Ledger ledger_;
  Metrics metrics_;
  std::vector<TxnId> pending_;
  std::map<TxnId, std::uint64_t> arrival_tick_;
  std::map<TxnId, std::uint64_t> submit_tick_;
  std::map<std::uint32_t, std::uint64_t> formation_tick_;
  std::uint32_t next_block_ = 1;
  std::uint64_t last_commit_sched_ = 0;
  std::uint64_t last_commit_tick_ = 0;  // restart marker for the locked mode
  std::uint64_t timeout_generation_ = 0;
  std::uint64_t last_event_tick_ = 0;
};

void Simulator::submit(std::size_t idx, std::uint64_t now) {
  const Proposal& p = trace_.proposals[idx];
  metrics_.submitted++;
  submit_tick_[p.id] = now;
  const ExecMode mode = policy_->exec_mode();

  if (mode == ExecMode::SnapshotPinned) {
    Endorsement e = simulate(p, store_, now, cfg_.read_interval);
    if (!e.app_error) {
      // Keep the snapshot pinned for the simulation's logical duration.
      pins_.emplace(endorsements_.size(), store_.acquire(e.sim_block));
    }
    finish_simulation(e);
    return;
  }

  // Latest-state execution, one read per step when the interval is nonzero.
  SimState& sim = sims_[idx];
  sim.plan = read_plan(p);
  const std::uint64_t gap = read_gap(p);
  if (sim.plan.empty() || gap == 0) {
    Endorsement e;
    e.txn.id = p.id;
    e.sim_block = store_.latest_block();
    e.sim_block_last = e.sim_block;
    for (const Key& key : sim.plan) {
      auto hit = store_.read_latest(key);
      if (hit) e.txn.readset[key] = hit->first;
      sim.values[key] = hit ? std::optional<Value>(hit->second) : std::nullopt;
    }
    e.txn.start_ts = SeqNum::snapshot_of(e.sim_block_last);
    e.finish_tick = now + sim.plan.size() * gap;
    auto result = apply_contract(p, sim.values);
    if (result.app_error) {
      e.app_error = true;
      e.error = result.error;
    } else {
      e.txn.writeset = std::move(result.writes);
    }
    finish_simulation(e);
    return;
  }
  sim.active = true;
  sim.start_tick = now;
  sim.generation++;
  events_.push({now, kReadPrio, idx, sim.generation});
}

void Simulator::read_step(std::size_t idx, std::uint64_t now, std::uint64_t generation) {
  SimState& sim = sims_[idx];
  if (!sim.active || sim.generation != generation) return;
  const Proposal& p = trace_.proposals[idx];
  const std::uint64_t gap = read_gap(p);

  // The locked mode re-simulates against the new latest state whenever a
  // block committed inside the simulation interval.
  if (policy_->exec_mode() == ExecMode::LockedLatest && last_commit_tick_ > sim.start_tick) {
    sim.start_tick = now;
    sim.next_read = 0;
    sim.values.clear();
    sim.readset.clear();
    metrics_.resimulations++;
  }

  const Key& key = sim.plan[sim.next_read];
  auto hit = store_.read_latest(key);
  if (hit) sim.readset[key] = hit->first;
  sim.values[key] = hit ? std::optional<Value>(hit->second) : std::nullopt;
  if (sim.next_read == 0) sim.first_block = store_.latest_block();
  sim.last_block = store_.latest_block();
  sim.next_read++;

  if (sim.next_read < sim.plan.size()) {
    events_.push({now + gap, kReadPrio, idx, generation});
    return;
  }
  sim.active = false;
  Endorsement e;
  e.txn.id = p.id;
  e.txn.readset = sim.readset;
  e.sim_block = sim.first_block;
  e.sim_block_last = sim.last_block;
  e.txn.start_ts = SeqNum::snapshot_of(sim.last_block);
  e.finish_tick = sim.start_tick + sim.plan.size() * gap;
  auto result = apply_contract(p, sim.values);
  if (result.app_error) {
    e.app_error = true;
    e.error = result.error;
  } else {
    e.txn.writeset = std::move(result.writes);
  }
  finish_simulation(e);
}

void Simulator::finish_simulation(const Endorsement& e) {
  if (e.app_error) {
    metrics_.app_errors++;
    return;
  }
  endorsements_.push_back(e);
  events_.push({dispatch_to_ordering(e, cfg_.client_delay), kArrivalPrio, e.txn.id,
                endorsements_.size() - 1});
}

void Simulator::arrival(std::size_t endorsement_idx, std::uint64_t now) {
  const Endorsement& e = endorsements_[endorsement_idx];
  metrics_.arrivals++;
  pins_.erase(endorsement_idx);

  auto started = Clock::now();
  ArrivalOutcome outcome = policy_->on_arrival(e.txn, e);
  metrics_.admit_us.add(elapsed_us(started));

  if (hooks_ && hooks_->on_arrival_decision) {
    hooks_->on_arrival_decision(e.txn, outcome.admitted ? TxnStatus::Pending : outcome.status,
                                policy_->graph());
  }
  Transaction txn = e.txn;
  if (!outcome.admitted) {
    txn.status = outcome.status;
    ledger_.txns[txn.id] = std::move(txn);
    ledger_.rejected.push_back({e.txn.id, outcome.status});
    return;
  }
  ledger_.txns[txn.id] = std::move(txn);
  arrival_tick_[e.txn.id] = now;
  pending_.push_back(e.txn.id);
  if (pending_.size() >= cfg_.block_size) {
    form_block(now);
  } else if (pending_.size() == 1) {
    events_.push({now + cfg_.effective_timeout(), kTimeoutPrio, ++timeout_generation_});
  }
}

void Simulator::form_block(std::uint64_t now) {
  const std::uint32_t block_number = next_block_++;
  std::vector<const Transaction*> batch;
  batch.reserve(pending_.size());
  for (TxnId id : pending_) batch.push_back(&ledger_.txns.at(id));

  auto started = Clock::now();
  FormOutcome fo = policy_->on_block_formation(batch, block_number);
  metrics_.reorder_us.add(elapsed_us(started));

  for (const auto& [id, status] : fo.aborts) {
    ledger_.txns.at(id).status = status;
    ledger_.rejected.push_back({id, status});
    metrics_.pending_wait_ticks.add(now - arrival_tick_.at(id));
  }

  Block block;
  block.number = block_number;
  block.txns = fo.order;
  const bool accept_all = policy_->validate_mode() == ValidateMode::AcceptAll;
  std::uint32_t pos = 1;
  for (TxnId id : fo.order) {
    Transaction& txn = ledger_.txns.at(id);
    txn.end_ts = SeqNum{block_number, pos++};
    if (accept_all) txn.status = TxnStatus::Committed;
    block.statuses.push_back(accept_all ? TxnStatus::Committed : TxnStatus::Pending);
    metrics_.pending_wait_ticks.add(now - arrival_tick_.at(id));
  }
  ledger_.blocks.push_back(std::move(block));
  formation_tick_[block_number] = now;

  if (hooks_ && hooks_->on_block_formed) {
    std::vector<Transaction> emitted;
    for (TxnId id : fo.order) emitted.push_back(ledger_.txns.at(id));
    hooks_->on_block_formed(block_number, emitted, policy_->graph());
  }

  const std::uint64_t commit_tick =
      std::max(now, last_commit_sched_) + fo.order.size() * cfg_.validation_cost;
  last_commit_sched_ = commit_tick;
  events_.push({commit_tick, kCommitPrio, block_number});

  pending_.clear();
  ++timeout_generation_;  // cancel any outstanding timer
}

void Simulator::commit_block_event(std::uint32_t block_number, std::uint64_t now) {
  Block& block = ledger_.blocks[block_number - 1];
  std::vector<const Transaction*> order;
  order.reserve(block.txns.size());
  for (TxnId id : block.txns) order.push_back(&ledger_.txns.at(id));

  if (policy_->validate_mode() == ValidateMode::VersionCheck) {
    auto statuses = fabric_validate(block_number, order, store_);
    block.statuses = statuses;
    for (std::size_t i = 0; i < block.txns.size(); ++i) {
      ledger_.txns.at(block.txns[i]).status = statuses[i];
    }
  }

  std::vector<MvStore::CommitEffect> effects;
  for (std::size_t i = 0; i < block.txns.size(); ++i) {
    if (block.statuses[i] != TxnStatus::Committed) continue;
    effects.push_back({static_cast<std::uint32_t>(i + 1),
                       &ledger_.txns.at(block.txns[i]).writeset});
  }
  store_.apply_block(block_number, effects);
  store_.prune_snapshots(block_number >= cfg_.max_span ? block_number - cfg_.max_span : 0);
  last_commit_tick_ = now;

  metrics_.validation_ticks.add(now - formation_tick_.at(block_number));
  for (TxnId id : block.txns) {
    metrics_.e2e_ticks.add(now - submit_tick_.at(id));
  }
}

void Simulator::timeout(std::uint64_t generation, std::uint64_t now) {
  if (generation != timeout_generation_ || pending_.empty()) return;
  form_block(now);
}

RunResult Simulator::run() {
  auto preload = preload_entries(cfg_.workload);
  preload.insert(preload.end(), cfg_.extra_preload.begin(), cfg_.extra_preload.end());
  store_.preload(preload);
  PolicyConfig pc{cfg_.max_span, cfg_.reach, BloomParams{}};
  policy_ = make_policy(cfg_.policy, store_, pc);

  sims_.resize(trace_.proposals.size());
  for (std::size_t i = 0; i < trace_.proposals.size(); ++i) {
    events_.push({trace_.proposals[i].tick, kSubmitPrio, i});
  }

  while (!events_.empty()) {
    Event ev = events_.top();
    events_.pop();
    last_event_tick_ = ev.tick;
    switch (ev.prio) {
      case kCommitPrio:
        commit_block_event(static_cast<std::uint32_t>(ev.key), ev.tick);
        break;
      case kSubmitPrio:
        submit(ev.key, ev.tick);
        break;
      case kReadPrio:
        read_step(ev.key, ev.tick, ev.aux);
        break;
      case kArrivalPrio:
        arrival(ev.aux, ev.tick);
        break;
      case kTimeoutPrio:
        timeout(ev.key, ev.tick);
        break;
    }
  }

  for (const auto& [id, txn] : ledger_.txns) {
    switch (txn.status) {
      case TxnStatus::Committed: metrics_.committed++; break;
      case TxnStatus::AbortedEarly: metrics_.aborted_early++; break;
      case TxnStatus::AbortedUnreorderable: metrics_.aborted_unreorderable++; break;
      case TxnStatus::AbortedStaleSpan: metrics_.aborted_stale_span++; break;
      case TxnStatus::AbortedValidation: metrics_.aborted_validation++; break;
      case TxnStatus::AbortedFalsePositive: metrics_.aborted_false_positive++; break;
      case TxnStatus::Pending: break;
    }
  }
  for (const auto& block : ledger_.blocks) metrics_.in_ledger += block.txns.size();
  metrics_.duration_ticks = last_event_tick_;
  const double horizon = std::max<std::uint64_t>(1, metrics_.duration_ticks);
  metrics_.raw_throughput = static_cast<double>(metrics_.in_ledger) * 1000.0 / horizon;
  metrics_.effective_throughput = static_cast<double>(metrics_.committed) * 1000.0 / horizon;
  if (const DepGraph* graph = policy_->graph()) {
    metrics_.graph = graph->stats();
  }

  RunResult result;
  result.cfg = cfg_;
  result.ledger = std::move(ledger_);
  result.metrics = std::move(metrics_);
  result.final_state = store_.dump();
  return result;
}

}  // namespace

RunResult run(const SimConfig& cfg) {
  cfg.validate();
  Trace trace = generate(cfg.workload, cfg.seed, cfg.run_length, cfg.request_rate);
  return run_with_trace(cfg, trace);
}

RunResult run_with_trace(const SimConfig& cfg, const Trace& trace, const AuditHooks* hooks) {
  cfg.validate();
  Simulator sim(cfg, trace, hooks);
  return sim.run();
}

}  // namespace eov
