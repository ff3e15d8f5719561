#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eov/core.hpp"

namespace eov {

/// Storage behind a committed-access index. Entries are keyed record-first,
/// (record key, commit seq), so a prefix range scan enumerates one record's
/// history in commit order: O(log n) seek, O(result) scan.
class IndexBackend {
 public:
  using Entry = std::pair<std::pair<Key, SeqNum>, TxnId>;
  virtual ~IndexBackend() = default;
  virtual void put(const Key& key, SeqNum seq, TxnId txn) = 0;
  /// Visits entries for `key` with seq in [from, to) in ascending order;
  /// stops early when `fn` returns false.
  virtual void scan(const Key& key, SeqNum from, SeqNum to,
                    const std::function<bool(SeqNum, TxnId)>& fn) const = 0;
  /// Last entry for `key` with seq < before, if any.
  virtual std::optional<std::pair<SeqNum, TxnId>> last_below(const Key& key,
                                                             SeqNum before) const = 0;
};

std::unique_ptr<IndexBackend> make_mem_backend();

/// Append-only log file backend: records are replayed into an in-memory
/// ordered map on open and appended on every put.
std::unique_ptr<IndexBackend> make_log_backend(const std::string& path);

/// Multi-versioned index over committed transactions (the CW and CR roles).
class CommittedIndex {
 public:
  explicit CommittedIndex(std::unique_ptr<IndexBackend> backend = make_mem_backend())
      : backend_(std::move(backend)) {}

  void append(const Key& key, SeqNum commit_seq, TxnId txn) {
    backend_->put(key, commit_seq, txn);
  }

  /// Last committed transaction touching `key` with commit seq < seq.
  std::optional<std::pair<SeqNum, TxnId>> before(const Key& key, SeqNum seq) const {
    return backend_->last_below(key, seq);
  }

  /// Last committed transaction touching `key`.
  std::optional<std::pair<SeqNum, TxnId>> last(const Key& key) const {
    return backend_->last_below(key, SeqNum{UINT32_MAX, UINT32_MAX});
  }

  /// All committed transactions touching `key` with commit seq >= seq.
  std::vector<TxnId> range_from(const Key& key, SeqNum seq) const {
    std::vector<TxnId> out;
    backend_->scan(key, seq, SeqNum{UINT32_MAX, UINT32_MAX},
                   [&](SeqNum, TxnId id) {
                     out.push_back(id);
                     return true;
                   });
    return out;
  }

 private:
  std::unique_ptr<IndexBackend> backend_;
};

/// The four dependency-resolution indices: committed writers/readers plus
/// in-memory pending writers/readers. Pending entries keep arrival order.
struct AccessIndices {
  CommittedIndex cw;  // committed writers, keyed by written key
  CommittedIndex cr;  // committed readers of the then-latest value
  std::map<Key, std::vector<TxnId>> pw;
  std::map<Key, std::vector<TxnId>> pr;

  void add_pending(const Transaction& t);
  void remove_pending(const Transaction& t);
};

}  // namespace eov
