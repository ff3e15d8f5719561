#include <doctest.h>

#include <random>
#include <set>

#include "eov/reach_filter.hpp"

using namespace eov;

TEST_CASE("exact mode is a plain set") {
  RelayClock clock;
  ReachFilter f(ReachMode::Exact, {});
  f.insert(7, clock);
  CHECK(f.may_contain(7, clock));
  CHECK_FALSE(f.may_contain(8, clock));
  ReachFilter g(ReachMode::Exact, {});
  g.insert(9, clock);
  f.merge(g, clock);
  CHECK(f.may_contain(9, clock));
  CHECK(f.exact_size() == 2);
}

TEST_CASE("bloom mode never loses live members across one relay") {
  RelayClock clock;
  BloomParams params;
  ReachFilter f(ReachMode::Bloom, params);
  std::set<TxnId> inserted;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    TxnId id = rng() % 100000;
    f.insert(id, clock);
    inserted.insert(id);
  }
  // One relay: the previously collecting slot becomes the tester and still
  // holds everything inserted so far.
  clock.maybe_relay(5, 7);
  for (TxnId id : inserted) CHECK(f.may_contain(id, clock));
}

TEST_CASE("bloom merge is a bitwise superset union") {
  RelayClock clock;
  BloomParams params;
  ReachFilter a(ReachMode::Bloom, params), b(ReachMode::Bloom, params);
  std::mt19937_64 rng(2);
  std::set<TxnId> in_a, in_b;
  for (int i = 0; i < 40; ++i) {
    TxnId x = rng() % 50000, y = rng() % 50000;
    a.insert(x, clock);
    in_a.insert(x);
    b.insert(y, clock);
    in_b.insert(y);
  }
  a.merge(b, clock);
  for (TxnId id : in_a) CHECK(a.may_contain(id, clock));
  for (TxnId id : in_b) CHECK(a.may_contain(id, clock));
}

TEST_CASE("a node sleeping through two relays drops its stale window") {
  RelayClock clock;
  BloomParams params;
  ReachFilter f(ReachMode::Bloom, params);
  f.insert(42, clock);
  clock.maybe_relay(5, 7);    // relay 1
  clock.maybe_relay(9, 12);   // relay 2; everything from before is prunable
  CHECK_FALSE(f.may_contain(42, clock));
  // New inserts work against the fresh window.
  f.insert(43, clock);
  CHECK(f.may_contain(43, clock));
}

TEST_CASE("relay only fires when the earliest committed block passes the anchor") {
  RelayClock clock;
  const auto e0 = clock.epoch();
  clock.maybe_relay(0, 1);  // nothing committed yet
  CHECK(clock.epoch() == e0);
  clock.maybe_relay(1, 2);
  CHECK(clock.epoch() == e0 + 1);
  const auto young = clock.young_anchor();
  clock.maybe_relay(young, young + 1);  // not strictly past the anchor
  CHECK(clock.epoch() == e0 + 1);
  clock.maybe_relay(young + 1, young + 2);
  CHECK(clock.epoch() == e0 + 2);
}
