#include "eov/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace eov::oracle {

namespace {

std::vector<const Transaction*> by_end_ts(const std::vector<Transaction>& txns) {
  std::vector<const Transaction*> sorted;
  sorted.reserve(txns.size());
  for (const auto& t : txns) {
    if (!t.end_ts) throw ContractViolation("oracle: committed txn without end_ts");
    sorted.push_back(&t);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Transaction* a, const Transaction* b) {
              return *a->end_ts < *b->end_ts;
            });
  return sorted;
}

void dedupe_edges(std::vector<ClassifiedDep>& edges) {
  std::sort(edges.begin(), edges.end(), [](const ClassifiedDep& a, const ClassifiedDep& b) {
    return std::tie(a.from, a.to, a.kind) < std::tie(b.from, b.to, b.kind);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const ClassifiedDep& a, const ClassifiedDep& b) {
                            return a.from == b.from && a.to == b.to && a.kind == b.kind;
                          }),
              edges.end());
}

}  // namespace

ConflictGraph build_conflict_graph_exhaustive(const std::vector<Transaction>& committed) {
  ConflictGraph g;
  auto sorted = by_end_ts(committed);
  for (const auto* t : sorted) g.nodes.push_back(t->id);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      auto deps = classify_dependency(*sorted[i], *sorted[j]);
      g.edges.insert(g.edges.end(), deps.begin(), deps.end());
    }
  }
  dedupe_edges(g.edges);
  return g;
}

ConflictGraph build_conflict_graph_indexed(const std::vector<Transaction>& committed) {
  ConflictGraph g;
  auto sorted = by_end_ts(committed);
  std::map<Key, std::vector<const Transaction*>> writers;
  std::map<Key, std::vector<const Transaction*>> readers;
  std::unordered_map<TxnId, const Transaction*> by_id;
  for (const auto* t : sorted) {
    g.nodes.push_back(t->id);
    by_id[t->id] = t;
    for (const auto& [key, _] : t->writeset) writers[key].push_back(t);
    for (const auto& [key, _] : t->readset) readers[key].push_back(t);
  }

  auto classify_rw = [](const Transaction& reader, const Transaction& writer) {
    if (!are_concurrent(reader, writer)) {
      return ClassifiedDep{DependencyKind::NRw, reader.id, writer.id};
    }
    if (*writer.end_ts < *reader.end_ts) {
      return ClassifiedDep{DependencyKind::AntiRw, reader.id, writer.id};
    }
    return ClassifiedDep{DependencyKind::CRw, reader.id, writer.id};
  };

  for (const auto& [key, ws] : writers) {
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
      const auto& a = *ws[i];
      const auto& b = *ws[i + 1];
      g.edges.push_back({are_concurrent(a, b) ? DependencyKind::CWw : DependencyKind::NWw,
                         a.id, b.id});
    }
  }
  for (const auto& [key, rs] : readers) {
    auto wit = writers.find(key);
    const auto* ws = wit == writers.end() ? nullptr : &wit->second;
    for (const auto* r : rs) {
      const Version version = r->readset.at(key);
      if (version.block > 0) {
        // Reads-from edge when the version's writer is part of the history.
        if (ws) {
          auto match = std::find_if(ws->begin(), ws->end(), [&](const Transaction* w) {
            return *w->end_ts == version;
          });
          if (match != ws->end() && (*match)->id != r->id) {
            g.edges.push_back({DependencyKind::NWr, (*match)->id, r->id});
          }
        }
      }
      if (ws) {
        // First writer installing a version after the one read; the writer
        // chain carries the dependency to all later ones.
        auto next = std::find_if(ws->begin(), ws->end(), [&](const Transaction* w) {
          return version < *w->end_ts;
        });
        if (next != ws->end() && (*next)->id != r->id) {
          g.edges.push_back(classify_rw(*r, **next));
        }
      }
    }
  }
  dedupe_edges(g.edges);
  return g;
}

namespace {

// Iterative cycle search; returns some cycle as a node sequence.
std::optional<std::vector<TxnId>> find_cycle(const ConflictGraph& g) {
  std::map<TxnId, std::vector<TxnId>> adj;
  for (const auto& e : g.edges) {
    if (e.from != e.to) adj[e.from].push_back(e.to);
  }
  std::map<TxnId, int> state;
  for (TxnId root : g.nodes) {
    if (state[root]) continue;
    std::vector<std::pair<TxnId, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [cur, idx] = stack.back();
      auto& next_list = adj[cur];
      if (idx >= next_list.size()) {
        state[cur] = 2;
        stack.pop_back();
        continue;
      }
      TxnId next = next_list[idx++];
      if (state[next] == 1) {
        std::vector<TxnId> cycle;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [&](const auto& fr) { return fr.first == next; });
        for (; it != stack.end(); ++it) cycle.push_back(it->first);
        return cycle;
      }
      if (state[next] == 0) {
        state[next] = 1;
        stack.push_back({next, 0});
      }
    }
  }
  return std::nullopt;
}

// Shortest cycle through any node of `seed_cycle`, by BFS over the graph.
std::vector<TxnId> minimize_cycle(const ConflictGraph& g,
                                  const std::vector<TxnId>& seed_cycle) {
  std::map<TxnId, std::vector<TxnId>> adj;
  for (const auto& e : g.edges) {
    if (e.from != e.to) adj[e.from].push_back(e.to);
  }
  std::vector<TxnId> best = seed_cycle;
  for (TxnId start : seed_cycle) {
    std::map<TxnId, TxnId> parent;
    std::deque<TxnId> queue{start};
    std::set<TxnId> seen{start};
    bool closed = false;
    while (!queue.empty() && !closed) {
      TxnId cur = queue.front();
      queue.pop_front();
      for (TxnId next : adj[cur]) {
        if (next == start) {
          std::vector<TxnId> cycle{cur};
          while (cycle.back() != start) {
            auto p = parent.find(cycle.back());
            if (p == parent.end()) break;
            cycle.push_back(p->second);
          }
          std::reverse(cycle.begin(), cycle.end());
          if (cycle.size() < best.size()) best = cycle;
          closed = true;
          break;
        }
        if (seen.insert(next).second) {
          parent[next] = cur;
          queue.push_back(next);
        }
      }
    }
  }
  return best;
}

}  // namespace

VerifyResult verify_serializable(const std::vector<Transaction>& committed) {
  VerifyResult result;
  auto graph = build_conflict_graph_indexed(committed);
  if (auto cycle = find_cycle(graph)) {
    result.ok = false;
    result.cycle = minimize_cycle(graph, *cycle);
  }
  return result;
}

bool has_anti_rw(const std::vector<Transaction>& committed) {
  auto graph = build_conflict_graph_indexed(committed);
  return std::any_of(graph.edges.begin(), graph.edges.end(), [](const ClassifiedDep& e) {
    return e.kind == DependencyKind::AntiRw;
  });
}

BruteForceResult brute_force_reorderable(const std::vector<Transaction>& committed_prefix,
                                         const std::vector<Transaction>& pending,
                                         std::uint32_t next_block,
                                         bool check_lemmas) {
  if (pending.size() > 8) {
    throw ContractViolation("brute_force_reorderable: more than 8 pending transactions");
  }
  BruteForceResult result;

  std::vector<std::size_t> perm(pending.size());
  std::iota(perm.begin(), perm.end(), 0);

  auto edge_key = [](const ClassifiedDep& e) {
    return std::tuple(e.from, e.to, e.kind);
  };
  std::optional<std::set<std::tuple<TxnId, TxnId, DependencyKind>>> prefix_edges_ref;
  std::set<TxnId> prefix_ids;
  for (const auto& t : committed_prefix) prefix_ids.insert(t.id);

  // Reference rw directions of concurrent pending pairs from the first
  // permutation (Lemma 3: no reordering may change them). A pair can carry
  // both directions at once when each reads a key the other writes.
  std::optional<std::map<std::pair<TxnId, TxnId>, std::set<bool>>> rw_dirs_ref;

  do {
    std::vector<Transaction> all = committed_prefix;
    std::uint32_t pos = 1;
    for (std::size_t idx : perm) {
      Transaction t = pending[idx];
      t.end_ts = SeqNum{next_block, pos++};
      all.push_back(std::move(t));
    }
    auto graph = build_conflict_graph_exhaustive(all);
    result.permutations_tried++;

    if (check_lemmas) {
      std::map<TxnId, std::size_t> pending_pos;
      for (std::size_t i = 0; i < perm.size(); ++i) pending_pos[pending[perm[i]].id] = i;
      std::set<std::tuple<TxnId, TxnId, DependencyKind>> prefix_edges;
      std::map<std::pair<TxnId, TxnId>, std::set<bool>> rw_dirs;
      for (const auto& e : graph.edges) {
        const bool from_prefix = prefix_ids.count(e.from) > 0;
        const bool to_prefix = prefix_ids.count(e.to) > 0;
        if (from_prefix || to_prefix) prefix_edges.insert(edge_key(e));
        if (!from_prefix && !to_prefix) {
          if (e.kind == DependencyKind::CRw || e.kind == DependencyKind::AntiRw) {
            auto key = std::minmax(e.from, e.to);
            rw_dirs[{key.first, key.second}].insert(e.from == key.first);
          } else if (e.kind == DependencyKind::CWw) {
            // ww direction must follow each permutation's commit order.
            if (pending_pos.at(e.from) >= pending_pos.at(e.to)) {
              result.lemma_violations.push_back(
                  "ww direction did not flip with commit order between " +
                  std::to_string(e.from) + " and " + std::to_string(e.to));
            }
          }
        }
      }
      if (!rw_dirs_ref) {
        rw_dirs_ref = rw_dirs;
      } else if (*rw_dirs_ref != rw_dirs) {
        result.lemma_violations.push_back("rw direction changed under reordering");
      }
      if (!prefix_edges_ref) {
        prefix_edges_ref = prefix_edges;
      } else if (*prefix_edges_ref != prefix_edges) {
        result.lemma_violations.push_back("prefix-incident edges changed under reordering");
      }
      // Pending transactions share the block, so every pair stays concurrent
      // under every permutation.
      for (std::size_t i = 0; i + 1 < all.size(); ++i) {
        if (prefix_ids.count(all[i].id)) continue;
        for (std::size_t j = i + 1; j < all.size(); ++j) {
          if (prefix_ids.count(all[j].id)) continue;
          if (!are_concurrent(all[i], all[j])) {
            result.lemma_violations.push_back("pending pair lost concurrency");
          }
        }
      }
    }

    if (!result.order && !find_cycle(graph)) {
      std::vector<TxnId> order;
      for (std::size_t idx : perm) order.push_back(pending[idx].id);
      result.order = std::move(order);
      if (!check_lemmas) return result;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  return result;
}

namespace {

// Version history of a tiny key space, enough to hand out snapshot-consistent
// readsets to generated instances.
struct VersionHistory {
  std::map<Key, std::vector<Version>> versions;  // ascending commit seqs

  explicit VersionHistory(int keys) {
    for (int k = 0; k < keys; ++k) {
      versions[key_name(k)] = {Version{0, static_cast<std::uint32_t>(k + 1)}};
    }
  }

  static Key key_name(int k) { return "k" + std::to_string(k); }

  Version at_snapshot(const Key& key, std::uint32_t block) const {
    const auto& chain = versions.at(key);
    Version out = chain.front();
    for (const auto& v : chain) {
      if (v.block <= block) out = v;
    }
    return out;
  }

  void commit(const Transaction& t) {
    for (const auto& [key, _] : t.writeset) versions[key].push_back(*t.end_ts);
  }
};

}  // namespace

CrossCheckReport cross_check_admission(const CrossCheckParams& params) {
  CrossCheckReport report;
  std::mt19937_64 rng(params.seed);
  auto pick = [&rng](std::uint64_t n) { return static_cast<int>(rng() % n); };

  for (int instance = 0; instance < params.instances; ++instance) {
    DepGraphConfig cfg;
    cfg.reach = params.reach;
    cfg.max_span = 8;
    DepGraph graph(cfg);
    VersionHistory history(params.keys);
    std::vector<Transaction> committed;
    std::vector<Transaction> live_pending;
    TxnId next_id = 1;

    auto make_txn = [&](std::uint32_t snapshot_block) {
      Transaction t;
      t.id = next_id++;
      t.start_ts = SeqNum::snapshot_of(snapshot_block);
      int nread = pick(params.keys + 1);
      int nwrite = pick(params.keys + 1);
      if (nread == 0 && nwrite == 0) nwrite = 1;
      std::vector<int> ks(params.keys);
      std::iota(ks.begin(), ks.end(), 0);
      std::shuffle(ks.begin(), ks.end(), rng);
      for (int i = 0; i < nread; ++i) {
        Key key = VersionHistory::key_name(ks[i]);
        t.readset[key] = history.at_snapshot(key, snapshot_block);
      }
      std::shuffle(ks.begin(), ks.end(), rng);
      for (int i = 0; i < nwrite; ++i) {
        t.writeset[VersionHistory::key_name(ks[i])] = static_cast<Value>(rng() % 1000);
      }
      return t;
    };

    const int rounds = 1 + pick(3);
    for (int round = 0; round < rounds; ++round) {
      const std::uint32_t latest = graph.next_block() - 1;
      const bool last_round = round == rounds - 1;
      const int batch = last_round ? 1 + pick(params.max_pending) : 1 + pick(3);
      for (int i = 0; i < batch; ++i) {
        // Snapshots lag at most two blocks behind.
        const std::uint32_t lag = static_cast<std::uint32_t>(pick(3));
        const std::uint32_t snapshot = latest > lag ? latest - lag : 0;
        Transaction t = make_txn(snapshot);
        AdmitResult res = graph.admit_transaction(t);
        switch (res) {
          case AdmitResult::Reorderable:
            live_pending.push_back(t);
            report.admitted++;
            break;
          case AdmitResult::AbortedUnreorderable: {
            report.aborted_unreorderable++;
            std::vector<Transaction> batch_pending = live_pending;
            batch_pending.push_back(t);
            auto bf = brute_force_reorderable(committed, batch_pending,
                                              graph.next_block(), params.check_lemmas);
            for (auto& v : bf.lemma_violations) {
              report.divergences.push_back("instance " + std::to_string(instance) +
                                           ": " + v);
            }
            if (bf.order) {
              std::ostringstream msg;
              msg << "instance " << instance << ": txn " << t.id
                  << " aborted as unreorderable but a serializable order exists";
              report.divergences.push_back(msg.str());
            }
            break;
          }
          case AdmitResult::AbortedFalsePositive:
            report.aborted_false_positive++;
            break;
          case AdmitResult::AbortedStaleSpan:
            break;
        }
      }
      const std::uint32_t block_number = graph.next_block();
      auto order = graph.form_block();
      std::uint32_t pos = 1;
      for (TxnId id : order) {
        auto it = std::find_if(live_pending.begin(), live_pending.end(),
                               [&](const Transaction& t) { return t.id == id; });
        it->end_ts = SeqNum{block_number, pos++};
        it->status = TxnStatus::Committed;
        committed.push_back(*it);
        history.commit(*it);
      }
      graph.commit_block(block_number, order);
      graph.prune();
      live_pending.clear();

      auto verdict = verify_serializable(committed);
      report.blocks_verified++;
      if (!verdict.ok) {
        std::ostringstream msg;
        msg << "instance " << instance << ": committed history not serializable after block "
            << block_number;
        report.divergences.push_back(msg.str());
      }
    }
    report.instances++;
  }
  return report;
}

}  // namespace eov::oracle
