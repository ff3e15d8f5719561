#include "eov/core.hpp"

#include <charconv>

namespace eov {

std::string SeqNum::str() const {
  return std::to_string(block) + ":" + std::to_string(pos);
}

SeqNum SeqNum::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw std::runtime_error("bad seqnum: " + text);
  SeqNum s;
  auto r1 = std::from_chars(text.data(), text.data() + colon, s.block);
  auto r2 = std::from_chars(text.data() + colon + 1, text.data() + text.size(), s.pos);
  if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
      r2.ptr != text.data() + text.size()) {
    throw std::runtime_error("bad seqnum: " + text);
  }
  return s;
}

Ordering cmp_seq(const SeqNum& a, const SeqNum& b) {
  if (a < b) return Ordering::Less;
  if (b < a) return Ordering::Greater;
  return Ordering::Equal;
}

const char* to_string(TxnStatus s) {
  switch (s) {
    case TxnStatus::Pending: return "pending";
    case TxnStatus::Committed: return "committed";
    case TxnStatus::AbortedEarly: return "aborted_early";
    case TxnStatus::AbortedUnreorderable: return "aborted_unreorderable";
    case TxnStatus::AbortedStaleSpan: return "aborted_stale_span";
    case TxnStatus::AbortedValidation: return "aborted_validation";
    case TxnStatus::AbortedFalsePositive: return "aborted_false_positive";
  }
  return "unknown";
}

const char* to_string(DependencyKind k) {
  switch (k) {
    case DependencyKind::NWw: return "n-ww";
    case DependencyKind::NWr: return "n-wr";
    case DependencyKind::NRw: return "n-rw";
    case DependencyKind::CWw: return "c-ww";
    case DependencyKind::CRw: return "c-rw";
    case DependencyKind::AntiRw: return "anti-rw";
  }
  return "unknown";
}

bool are_concurrent(const Transaction& t1, const Transaction& t2) {
  if (!t1.end_ts || !t2.end_ts) {
    throw ContractViolation("are_concurrent: transaction without end timestamp");
  }
  // The later-ending transaction must start before the earlier one ends.
  if (*t1.end_ts < *t2.end_ts) return t2.start_ts < *t1.end_ts;
  if (*t2.end_ts < *t1.end_ts) return t1.start_ts < *t2.end_ts;
  throw ContractViolation("are_concurrent: equal end timestamps");
}

std::vector<ClassifiedDep> classify_dependency(const Transaction& earlier,
                                               const Transaction& later) {
  if (!earlier.end_ts || !later.end_ts || !(*earlier.end_ts < *later.end_ts)) {
    throw ContractViolation("classify_dependency: pair not ordered by end timestamp");
  }
  const bool conc = are_concurrent(earlier, later);
  bool seen[6] = {};
  std::vector<ClassifiedDep> out;
  auto emit = [&](DependencyKind k, TxnId from, TxnId to) {
    if (seen[static_cast<int>(k)]) return;
    seen[static_cast<int>(k)] = true;
    out.push_back({k, from, to});
  };

  for (const auto& [key, _] : earlier.writeset) {
    if (later.writeset.count(key)) {
      emit(conc ? DependencyKind::CWw : DependencyKind::NWw, earlier.id, later.id);
    }
    if (auto it = later.readset.find(key); it != later.readset.end()) {
      if (conc) {
        // Concurrency forces the later reader's snapshot to predate the
        // earlier writer's commit, so the read missed the write.
        emit(DependencyKind::AntiRw, later.id, earlier.id);
      } else if (it->second == *earlier.end_ts) {
        emit(DependencyKind::NWr, earlier.id, later.id);
      }
    }
  }
  for (const auto& [key, _] : earlier.readset) {
    if (later.writeset.count(key)) {
      emit(conc ? DependencyKind::CRw : DependencyKind::NRw, earlier.id, later.id);
    }
  }
  return out;
}

}  // namespace eov
