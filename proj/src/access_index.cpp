#include "eov/access_index.hpp"

#include <algorithm>
#include <fstream>
#include <functional>

namespace eov {

namespace {

class MemBackend : public IndexBackend {
 public:
  void put(const Key& key, SeqNum seq, TxnId txn) override {
    map_[{key, seq}] = txn;
  }

  void scan(const Key& key, SeqNum from, SeqNum to,
            const std::function<bool(SeqNum, TxnId)>& fn) const override {
    for (auto it = map_.lower_bound({key, from});
         it != map_.end() && it->first.first == key && it->first.second < to; ++it) {
      if (!fn(it->first.second, it->second)) return;
    }
  }

  std::optional<std::pair<SeqNum, TxnId>> last_below(const Key& key,
                                                     SeqNum before) const override {
    auto it = map_.lower_bound({key, before});
    if (it == map_.begin()) return std::nullopt;
    --it;
    if (it->first.first != key) return std::nullopt;
    return std::make_pair(it->first.second, it->second);
  }

 protected:
  std::map<std::pair<Key, SeqNum>, TxnId> map_;
};

// Tab-separated append-only log: key, block, pos, txn. The full index is
// rebuilt into memory on open; puts append a record before updating it.
class LogBackend : public MemBackend {
 public:
  explicit LogBackend(const std::string& path) : path_(path) {
    std::ifstream in(path_);
    std::string key;
    std::uint32_t block, pos;
    TxnId txn;
    while (in >> key >> block >> pos >> txn) {
      map_[{key, SeqNum{block, pos}}] = txn;
    }
    out_.open(path_, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open index log: " + path_);
  }

  void put(const Key& key, SeqNum seq, TxnId txn) override {
    out_ << key << '\t' << seq.block << '\t' << seq.pos << '\t' << txn << '\n';
    MemBackend::put(key, seq, txn);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace

std::unique_ptr<IndexBackend> make_mem_backend() {
  return std::make_unique<MemBackend>();
}

std::unique_ptr<IndexBackend> make_log_backend(const std::string& path) {
  return std::make_unique<LogBackend>(path);
}

void AccessIndices::add_pending(const Transaction& t) {
  for (const auto& [key, _] : t.writeset) pw[key].push_back(t.id);
  for (const auto& [key, _] : t.readset) pr[key].push_back(t.id);
}

void AccessIndices::remove_pending(const Transaction& t) {
  auto drop = [&](std::map<Key, std::vector<TxnId>>& index, const Key& key) {
    auto it = index.find(key);
    if (it == index.end()) return;
    auto& ids = it->second;
    ids.erase(std::remove(ids.begin(), ids.end(), t.id), ids.end());
    if (ids.empty()) index.erase(it);
  };
  for (const auto& [key, _] : t.writeset) drop(pw, key);
  for (const auto& [key, _] : t.readset) drop(pr, key);
}

}  // namespace eov
