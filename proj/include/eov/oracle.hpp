#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eov/core.hpp"
#include "eov/depgraph.hpp"

namespace eov::oracle {

/// Precise conflict graph over committed transactions. Edge direction is
/// must-precede; anti-rw points from the reader to the writer that
/// committed first.
struct ConflictGraph {
  std::vector<TxnId> nodes;
  std::vector<ClassifiedDep> edges;
};

/// Exhaustive pairwise construction; quadratic, for small instances and as
/// the ground truth the indexed builder is checked against.
ConflictGraph build_conflict_graph_exhaustive(const std::vector<Transaction>& committed);

/// Key-indexed construction with reachability-equivalent edges (consecutive
/// writer chains, reads-from, reader to first later writer). Linear in
/// accesses; used for full-ledger verification.
ConflictGraph build_conflict_graph_indexed(const std::vector<Transaction>& committed);

struct VerifyResult {
  bool ok = true;
  std::vector<TxnId> cycle;  // a minimal witness when not ok
};

/// Serializability check of a committed history: the conflict graph must be
/// acyclic.
VerifyResult verify_serializable(const std::vector<Transaction>& committed);

/// True iff the committed history contains any anti-rw dependency; its
/// absence makes the schedule strongly serializable.
bool has_anti_rw(const std::vector<Transaction>& committed);

struct BruteForceResult {
  std::optional<std::vector<TxnId>> order;  // first serializable order found
  std::uint64_t permutations_tried = 0;
  std::vector<std::string> lemma_violations;
};

/// Enumerates all commit orders of `pending` appended to the committed
/// prefix as block `next_block`, recomputing concurrency-sensitive edges per
/// permutation. Refuses more than 8 pending transactions. When
/// `check_lemmas` is set, permutation-invariance of prefix edges and rw
/// direction plus ww flipping are asserted into the result.
BruteForceResult brute_force_reorderable(const std::vector<Transaction>& committed_prefix,
                                         const std::vector<Transaction>& pending,
                                         std::uint32_t next_block,
                                         bool check_lemmas = false);

struct CrossCheckParams {
  std::uint64_t seed = 1;
  int instances = 1000;
  int max_pending = 6;
  int keys = 3;
  ReachMode reach = ReachMode::Exact;
  bool check_lemmas = false;
};

struct CrossCheckReport {
  int instances = 0;
  std::uint64_t admitted = 0;
  std::uint64_t aborted_unreorderable = 0;
  std::uint64_t aborted_false_positive = 0;
  std::uint64_t blocks_verified = 0;
  std::vector<std::string> divergences;
  bool ok() const { return divergences.empty(); }
};

/// Replays random small instances through the admission pipeline: every
/// unreorderable abort must be proven unreorderable by brute force and every
/// formed block must verify serializable.
CrossCheckReport cross_check_admission(const CrossCheckParams& params);

}  // namespace eov::oracle
