#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eov {

using TxnId = std::uint64_t;
using Key = std::string;
using Value = std::int64_t;

/// Raised when an operation's preconditions are violated by the caller.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sequence number (block, position). Orders block snapshots, start
/// timestamps and end timestamps under one lexicographic total order.
/// The snapshot of committed block M carries sequence number (M+1, 0).
struct SeqNum {
  std::uint32_t block = 0;
  std::uint32_t pos = 0;

  friend auto operator<=>(const SeqNum&, const SeqNum&) = default;

  static SeqNum snapshot_of(std::uint32_t block_number) { return {block_number + 1, 0}; }

  std::string str() const;
  static SeqNum parse(const std::string& text);
};

enum class Ordering { Less, Equal, Greater };

Ordering cmp_seq(const SeqNum& a, const SeqNum& b);

/// A key's version is the sequence number of the transaction that last
/// wrote it; preloaded genesis keys carry (0, load position).
using Version = SeqNum;

enum class TxnStatus : std::uint8_t {
  Pending,
  Committed,
  AbortedEarly,
  AbortedUnreorderable,
  AbortedStaleSpan,
  AbortedValidation,
  AbortedFalsePositive,
};

const char* to_string(TxnStatus s);

struct Transaction {
  TxnId id = 0;
  SeqNum start_ts;                 // read-snapshot sequence, pos always 0
  std::optional<SeqNum> end_ts;    // assigned at inclusion in a block
  std::map<Key, Version> readset;
  std::map<Key, Value> writeset;
  TxnStatus status = TxnStatus::Pending;
};

struct Block {
  std::uint32_t number = 0;
  std::vector<TxnId> txns;             // 1-based positions, contiguous
  std::vector<TxnStatus> statuses;     // aligned with txns, filled by validation
};

/// The six canonical dependency kinds between snapshot transactions.
/// NWw/NWr/NRw hold only between non-concurrent pairs, CWw/CRw/AntiRw
/// only between concurrent pairs.
enum class DependencyKind : std::uint8_t { NWw, NWr, NRw, CWw, CRw, AntiRw };

const char* to_string(DependencyKind k);

/// A classified dependency for an ordered (earlier, later) pair. AntiRw is
/// the only kind whose edge points from the later-ending transaction back
/// to the earlier one (reader precedes the writer that commits first).
struct ClassifiedDep {
  DependencyKind kind;
  TxnId from = 0;
  TxnId to = 0;
};

/// True iff the two executions overlap: the later-ending transaction
/// started before the earlier-ending one committed. Both transactions
/// must carry an end timestamp.
bool are_concurrent(const Transaction& t1, const Transaction& t2);

/// Classifies every conflicting key access between `earlier` and `later`
/// (ordered by end timestamp) into the canonical kinds, deduplicated.
/// Disjoint access sets yield an empty result.
std::vector<ClassifiedDep> classify_dependency(const Transaction& earlier,
                                               const Transaction& later);

}  // namespace eov
