#include "eov/depgraph.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace eov {

namespace {

void sort_unique(std::vector<TxnId>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

}  // namespace

std::vector<TxnId> Resolution::pred() const {
  std::vector<TxnId> out;
  out.reserve(ww.size() + n_wr.size() + rw.size());
  out.insert(out.end(), ww.begin(), ww.end());
  out.insert(out.end(), n_wr.begin(), n_wr.end());
  out.insert(out.end(), rw.begin(), rw.end());
  sort_unique(out);
  return out;
}

DepGraph::DepGraph(DepGraphConfig cfg) : cfg_(cfg) {}

ReachFilter DepGraph::make_filter() const {
  return ReachFilter(cfg_.reach, cfg_.bloom);
}

const TxnNode* DepGraph::find(TxnId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

std::uint32_t DepGraph::earliest_live_committed() const {
  return live_per_block_.empty() ? 0 : live_per_block_.begin()->first;
}

Resolution DepGraph::resolve_dependencies(const Transaction& t) const {
  Resolution res;
  auto live = [&](TxnId id) { return id != t.id && nodes_.count(id) > 0; };
  auto add = [&](std::vector<TxnId>& dst, TxnId id) {
    if (live(id)) dst.push_back(id);
  };

  const SeqNum floor{earliest_live_committed(), 0};
  for (const auto& [key, _] : t.readset) {
    for (TxnId id : idx_.cw.range_from(key, t.start_ts)) add(res.anti_rw, id);
    if (auto it = idx_.pw.find(key); it != idx_.pw.end()) {
      for (TxnId id : it->second) add(res.anti_rw, id);
    }
    if (auto hit = idx_.cw.before(key, t.start_ts)) add(res.n_wr, hit->second);
  }
  for (const auto& [key, _] : t.writeset) {
    // Readers committed below the earliest live block are pruned anyway.
    for (TxnId id : idx_.cr.range_from(key, floor)) add(res.rw, id);
    if (auto it = idx_.pr.find(key); it != idx_.pr.end()) {
      for (TxnId id : it->second) add(res.rw, id);
    }
    if (auto hit = idx_.cw.last(key)) add(res.ww, hit->second);
  }
  sort_unique(res.ww);
  sort_unique(res.n_wr);
  sort_unique(res.rw);
  sort_unique(res.anti_rw);
  return res;
}

std::uint32_t DepGraph::stale_span_threshold() const {
  return next_block_ > cfg_.max_span ? next_block_ - cfg_.max_span : 0;
}

AdmitResult DepGraph::admit_transaction(const Transaction& t) {
  if (nodes_.count(t.id)) {
    throw ContractViolation("admit_transaction: duplicate id " + std::to_string(t.id));
  }
  // A transaction simulated against block H = next - max_span or earlier
  // can no longer be placed.
  const std::int64_t sim_block = t.start_ts.block == 0 ? 0 : t.start_ts.block - 1;
  if (sim_block <= static_cast<std::int64_t>(next_block_) - cfg_.max_span) {
    stats_.aborted_stale_span++;
    return AdmitResult::AbortedStaleSpan;
  }

  Resolution res = resolve_dependencies(t);
  const auto pred = res.pred();
  const auto& succ = res.succ();

  if (!succ.empty()) {
    bool positive = false;
    bool confirmed = false;
    for (TxnId p : pred) {
      const TxnNode& pnode = nodes_.at(p);
      for (TxnId s : succ) {
        stats_.cycle_tests++;
        if (!pnode.anti_reachable.may_contain(s, relay_)) continue;
        positive = true;
        if (cfg_.reach == ReachMode::Exact || reaches(s, p)) {
          confirmed = true;
          break;
        }
      }
      if (confirmed) break;
    }
    if (confirmed) {
      stats_.aborted_unreorderable++;
      return AdmitResult::AbortedUnreorderable;
    }
    if (positive) {
      // The filters vetoed the transaction but no true path exists.
      stats_.aborted_false_positive++;
      return AdmitResult::AbortedFalsePositive;
    }
  }

  TxnNode node;
  node.id = t.id;
  node.anti_reachable = make_filter();
  node.age = next_block_;
  node.arrival_index = arrival_counter_++;
  node.reads.assign(t.readset.begin(), t.readset.end());
  node.writes.reserve(t.writeset.size());
  for (const auto& [key, _] : t.writeset) node.writes.push_back(key);

  auto [it, _] = nodes_.emplace(t.id, std::move(node));
  update_reachability(it->second, res);

  pending_.push_back(t.id);
  pending_txns_.emplace(t.id, t);
  idx_.add_pending(t);
  stats_.admitted++;
  stats_.max_nodes = std::max(stats_.max_nodes, nodes_.size());
  return AdmitResult::Reorderable;
}

void DepGraph::update_reachability(TxnNode& node, const Resolution& res) {
  node.anti_reachable.insert(node.id, relay_);
  auto link_preds = [&](const std::vector<TxnId>& ids, std::uint8_t mask) {
    for (TxnId p : ids) {
      TxnNode& pnode = nodes_.at(p);
      pnode.succ[node.id] |= mask;
      node.anti_reachable.merge(pnode.anti_reachable, relay_);
    }
  };
  link_preds(res.ww, edge::kWw);
  link_preds(res.n_wr, edge::kWr);
  link_preds(res.rw, edge::kRw);

  if (res.anti_rw.empty()) {
    stats_.traversals_skipped++;
    return;
  }
  for (TxnId s : res.anti_rw) node.succ[s] |= edge::kAnti;

  // Push the new ancestry down through everything reachable from succ.
  std::vector<TxnId> stack(res.anti_rw.begin(), res.anti_rw.end());
  std::set<TxnId> visited;
  while (!stack.empty()) {
    TxnId cur = stack.back();
    stack.pop_back();
    if (!visited.insert(cur).second) continue;
    auto it = nodes_.find(cur);
    if (it == nodes_.end()) continue;
    TxnNode& snode = it->second;
    snode.anti_reachable.merge(node.anti_reachable, relay_);
    snode.age = std::max(snode.age, next_block_);
    stats_.nodes_traversed++;
    for (const auto& [next, _] : snode.succ) {
      if (!visited.count(next)) stack.push_back(next);
    }
  }
}

bool DepGraph::reaches(TxnId from, TxnId to) const {
  if (from == to) return true;
  std::vector<TxnId> stack{from};
  std::set<TxnId> visited;
  while (!stack.empty()) {
    TxnId cur = stack.back();
    stack.pop_back();
    if (!visited.insert(cur).second) continue;
    auto it = nodes_.find(cur);
    if (it == nodes_.end()) continue;
    for (const auto& [next, _] : it->second.succ) {
      if (next == to) return true;
      if (!visited.count(next)) stack.push_back(next);
    }
  }
  return false;
}

std::vector<TxnId> DepGraph::form_block() {
  if (pending_.empty()) return {};

  // Order the pending set by reachability in the full graph; paths may run
  // through committed nodes. Ties fall back to consensus arrival order.
  std::set<TxnId> in_p(pending_.begin(), pending_.end());
  std::map<TxnId, std::vector<TxnId>> edges;  // u -> pending reachable from u
  std::map<TxnId, std::uint32_t> indegree;
  for (TxnId id : pending_) indegree[id] = 0;
  for (TxnId source : pending_) {
    std::vector<TxnId> stack;
    std::set<TxnId> visited;
    for (const auto& [next, _] : nodes_.at(source).succ) stack.push_back(next);
    while (!stack.empty()) {
      TxnId cur = stack.back();
      stack.pop_back();
      if (cur == source || !visited.insert(cur).second) continue;
      auto it = nodes_.find(cur);
      if (it == nodes_.end()) continue;
      if (in_p.count(cur)) {
        edges[source].push_back(cur);
        indegree[cur]++;
      }
      for (const auto& [next, _] : it->second.succ) {
        if (!visited.count(next)) stack.push_back(next);
      }
    }
  }

  std::set<std::pair<std::uint32_t, TxnId>> ready;  // (arrival index, id)
  for (TxnId id : pending_) {
    if (indegree[id] == 0) ready.insert({nodes_.at(id).arrival_index, id});
  }
  std::vector<TxnId> order;
  order.reserve(pending_.size());
  while (!ready.empty()) {
    auto [_, id] = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (TxnId next : edges[id]) {
      if (--indegree[next] == 0) ready.insert({nodes_.at(next).arrival_index, next});
    }
  }
  if (order.size() != pending_.size()) {
    throw std::logic_error("form_block: cycle among admitted pending transactions");
  }

  restore_ww(order);
  pending_.clear();
  return order;
}

bool DepGraph::pair_connected(TxnId t1, TxnId t2) const {
  const TxnNode& n2 = nodes_.at(t2);
  if (cfg_.reach == ReachMode::Exact) return n2.anti_reachable.contains_exact(t1);
  // A bloom positive alone must not suppress the union: a false skip would
  // leave descendants without t1's ancestry and break the no-false-negative
  // guarantee. Screen with the filter, confirm on the edges.
  if (!n2.anti_reachable.may_contain(t1, relay_)) return false;
  return reaches(t1, t2);
}

void DepGraph::restore_ww(const std::vector<TxnId>& seq) {
  std::unordered_map<TxnId, std::uint32_t> position;
  position.reserve(seq.size());
  for (std::uint32_t i = 0; i < seq.size(); ++i) position[seq[i]] = i;

  std::set<TxnId> head_txns;
  for (const auto& [key, writers] : idx_.pw) {
    (void)key;
    if (writers.size() < 2) continue;
    std::vector<TxnId> sorted = writers;
    std::sort(sorted.begin(), sorted.end(), [&](TxnId a, TxnId b) {
      return position.at(a) < position.at(b);
    });
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      TxnId t1 = sorted[i];
      TxnId t2 = sorted[i + 1];
      if (pair_connected(t1, t2)) continue;
      nodes_.at(t1).succ[t2] |= edge::kWw;
      nodes_.at(t2).anti_reachable.merge(nodes_.at(t1).anti_reachable, relay_);
      head_txns.insert(t2);
      stats_.ww_edges_restored++;
    }
  }
  if (head_txns.empty()) return;

  // One topologically-ordered sweep over everything reachable from the
  // heads, so each node's filter is brought current exactly once.
  std::set<TxnId> affected;
  std::vector<TxnId> stack(head_txns.begin(), head_txns.end());
  while (!stack.empty()) {
    TxnId cur = stack.back();
    stack.pop_back();
    if (!affected.insert(cur).second) continue;
    auto it = nodes_.find(cur);
    if (it == nodes_.end()) continue;
    for (const auto& [next, _] : it->second.succ) {
      if (!affected.count(next)) stack.push_back(next);
    }
  }
  std::map<TxnId, std::uint32_t> indeg;
  for (TxnId id : affected) indeg.emplace(id, 0);
  for (TxnId id : affected) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) continue;
    for (const auto& [next, _] : it->second.succ) {
      if (auto d = indeg.find(next); d != indeg.end()) d->second++;
    }
  }
  std::set<TxnId> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.insert(id);
  }
  while (!ready.empty()) {
    TxnId id = *ready.begin();
    ready.erase(ready.begin());
    auto it = nodes_.find(id);
    if (it == nodes_.end()) continue;
    stats_.restore_sweep_visits++;
    for (const auto& [next, _] : it->second.succ) {
      auto d = indeg.find(next);
      if (d == indeg.end()) continue;
      nodes_.at(next).anti_reachable.merge(it->second.anti_reachable, relay_);
      if (--d->second == 0) ready.insert(next);
    }
  }
}

void DepGraph::commit_block(std::uint32_t block_number,
                            const std::vector<TxnId>& order) {
  if (block_number != next_block_) {
    throw ContractViolation("commit_block: expected block " +
                            std::to_string(next_block_));
  }
  std::uint32_t pos = 1;
  for (TxnId id : order) {
    TxnNode& node = nodes_.at(id);
    const SeqNum commit_seq{block_number, pos++};
    auto pending = pending_txns_.find(id);
    // A read enters CR only while its version is still the key's latest.
    for (const auto& [key, version] : node.reads) {
      auto latest = idx_.cw.last(key);
      const bool is_latest =
          latest ? latest->first == version : version.block == 0;
      if (is_latest) idx_.cr.append(key, commit_seq, id);
    }
    for (const Key& key : node.writes) idx_.cw.append(key, commit_seq, id);

    node.committed = true;
    node.commit_seq = commit_seq;
    node.age = std::max(node.age, block_number);
    age_queue_.push({node.age, id});
    live_per_block_[block_number]++;
    if (pending != pending_txns_.end()) {
      idx_.remove_pending(pending->second);
      pending_txns_.erase(pending);
    }
  }
  next_block_ = block_number + 1;
}

std::vector<TxnId> DepGraph::prune() {
  std::vector<TxnId> pruned;
  if (next_block_ > cfg_.max_span) {
    const std::uint32_t threshold = next_block_ - cfg_.max_span;
    while (!age_queue_.empty() && age_queue_.top().first < threshold) {
      auto [age, id] = age_queue_.top();
      age_queue_.pop();
      auto it = nodes_.find(id);
      if (it == nodes_.end() || !it->second.committed) continue;
      if (it->second.age != age) {
        // Stale entry; the node grew younger since it was queued.
        age_queue_.push({it->second.age, id});
        continue;
      }
      auto& count = live_per_block_.at(it->second.commit_seq.block);
      if (--count == 0) live_per_block_.erase(it->second.commit_seq.block);
      nodes_.erase(it);
      pruned.push_back(id);
      stats_.pruned_nodes++;
    }
  }
  relay_.maybe_relay(earliest_live_committed(), next_block_);
  std::sort(pruned.begin(), pruned.end());
  return pruned;
}

bool DepGraph::is_acyclic() const {
  std::unordered_map<TxnId, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<TxnId, std::map<TxnId, std::uint8_t>::const_iterator>> stack;
  for (const auto& [root, _] : nodes_) {
    if (state[root]) continue;
    state[root] = 1;
    stack.push_back({root, nodes_.at(root).succ.begin()});
    while (!stack.empty()) {
      auto& [cur, it] = stack.back();
      const auto& succ = nodes_.at(cur).succ;
      if (it == succ.end()) {
        state[cur] = 2;
        stack.pop_back();
        continue;
      }
      TxnId next = (it++)->first;
      if (!nodes_.count(next)) continue;
      if (state[next] == 1) return false;
      if (state[next] == 0) {
        state[next] = 1;
        stack.push_back({next, nodes_.at(next).succ.begin()});
      }
    }
  }
  return true;
}

std::string DepGraph::dot_dump() const {
  std::ostringstream out;
  out << "digraph dep {\n";
  std::vector<TxnId> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (TxnId id : ids) {
    const TxnNode& node = nodes_.at(id);
    out << "  t" << id << " [label=\"" << id << ' '
        << (node.committed ? "committed" : "pending") << " age=" << node.age
        << "\"];\n";
  }
  for (TxnId id : ids) {
    for (const auto& [to, mask] : nodes_.at(id).succ) {
      if (!nodes_.count(to)) continue;
      std::string label;
      if (mask & edge::kWw) label += "ww,";
      if (mask & edge::kWr) label += "wr,";
      if (mask & edge::kRw) label += "rw,";
      if (mask & edge::kAnti) label += "anti-rw,";
      if (!label.empty()) label.pop_back();
      out << "  t" << id << " -> t" << to << " [label=\"" << label << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace eov
