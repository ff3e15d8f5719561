#include "eov/reach_filter.hpp"

#include <algorithm>

namespace eov {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ReachFilter::ReachFilter(ReachMode mode, const BloomParams& params)
    : mode_(mode), params_(params) {
  if (mode_ == ReachMode::Bloom) {
    const std::size_t words = (params_.bits + 63) / 64;
    slots_[0].assign(words, 0);
    slots_[1].assign(words, 0);
  }
}

void ReachFilter::sync(const RelayClock& clock) const {
  if (epoch_ == clock.epoch()) return;
  if (clock.epoch() - epoch_ == 1) {
    // Exactly one relay was missed: the slot emptied at that relay is the
    // one now collecting since the young anchor.
    auto& slot = slots_[1 - clock.tester_slot()];
    std::fill(slot.begin(), slot.end(), 0);
  } else {
    // Two or more relays: everything stored predates the live window.
    std::fill(slots_[0].begin(), slots_[0].end(), 0);
    std::fill(slots_[1].begin(), slots_[1].end(), 0);
  }
  epoch_ = clock.epoch();
}

void ReachFilter::set_bits(int slot, TxnId id) {
  const std::uint64_t h1 = splitmix64(id ^ params_.seed1);
  const std::uint64_t h2 = splitmix64(id ^ params_.seed2) | 1;
  for (std::uint32_t i = 0; i < params_.hashes; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % params_.bits;
    slots_[slot][bit >> 6] |= 1ULL << (bit & 63);
  }
}

bool ReachFilter::test_bits(int slot, TxnId id) const {
  const std::uint64_t h1 = splitmix64(id ^ params_.seed1);
  const std::uint64_t h2 = splitmix64(id ^ params_.seed2) | 1;
  for (std::uint32_t i = 0; i < params_.hashes; ++i) {
    const std::uint64_t bit = (h1 + i * h2) % params_.bits;
    if (!(slots_[slot][bit >> 6] & (1ULL << (bit & 63)))) return false;
  }
  return true;
}

void ReachFilter::insert(TxnId id, const RelayClock& clock) {
  if (mode_ == ReachMode::Exact) {
    exact_.insert(id);
    return;
  }
  sync(clock);
  set_bits(0, id);
  set_bits(1, id);
}

bool ReachFilter::may_contain(TxnId id, const RelayClock& clock) const {
  if (mode_ == ReachMode::Exact) return exact_.count(id) > 0;
  sync(clock);
  return test_bits(clock.tester_slot(), id);
}

void ReachFilter::merge(const ReachFilter& other, const RelayClock& clock) {
  if (mode_ == ReachMode::Exact) {
    exact_.insert(other.exact_.begin(), other.exact_.end());
    return;
  }
  sync(clock);
  other.sync(clock);
  for (int slot = 0; slot < 2; ++slot) {
    auto& dst = slots_[slot];
    const auto& src = other.slots_[slot];
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] |= src[w];
  }
}

}  // namespace eov
