#include <doctest.h>

#include <cstdio>
#include <map>
#include <random>

#include "eov/workload.hpp"

using namespace eov;

TEST_CASE("generation is deterministic in spec and seed") {
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Mixed;
  auto a = generate(spec, 42, 500, 700);
  auto b = generate(spec, 42, 500, 700);
  REQUIRE(a.proposals.size() == b.proposals.size());
  for (std::size_t i = 0; i < a.proposals.size(); ++i) {
    CHECK(a.proposals[i].fn == b.proposals[i].fn);
    CHECK(a.proposals[i].args == b.proposals[i].args);
    CHECK(a.proposals[i].tick == b.proposals[i].tick);
  }
  auto c = generate(spec, 43, 500, 700);
  bool same = true;
  for (std::size_t i = 0; i < a.proposals.size(); ++i) {
    if (a.proposals[i].args != c.proposals[i].args) same = false;
  }
  CHECK_FALSE(same);
}

TEST_CASE("open-loop ticks follow the request rate") {
  WorkloadSpec spec;
  auto trace = generate(spec, 1, 1400, 700);
  CHECK(trace.proposals.front().tick == 0);
  CHECK(trace.proposals.back().tick == 1399 * 1000ull / 700);
  for (std::size_t i = 1; i < trace.proposals.size(); ++i) {
    CHECK(trace.proposals[i].tick >= trace.proposals[i - 1].tick);
  }
}

TEST_CASE("hot ratios hit the hot prefix at the configured frequency") {
  WorkloadSpec spec;
  spec.read_hot_ratio = 50;
  spec.write_hot_ratio = 0;
  const auto hot = spec.hot_accounts();
  auto trace = generate(spec, 9, 10000, 700);
  std::uint64_t hot_reads = 0, reads = 0, hot_writes = 0, writes = 0;
  for (const auto& p : trace.proposals) {
    for (int i = 0; i < 4; ++i) {
      reads++;
      if (p.args[i] < hot) hot_reads++;
      writes++;
      if (p.args[4 + i] < hot) hot_writes++;
    }
  }
  const double read_fraction = static_cast<double>(hot_reads) / reads;
  CHECK(read_fraction > 0.49);
  CHECK(read_fraction < 0.51);
  // write_hot 0: hot hits only by uniform chance over the cold pool.
  CHECK(static_cast<double>(hot_writes) / writes < 0.005);
}

TEST_CASE("zipf sampling is skewed by theta and uniform at zero") {
  std::mt19937_64 rng(3);
  SUBCASE("theta zero is uniform") {
    ZipfSampler zipf(1000, 0.0);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 100000; ++i) counts[zipf.sample(rng)]++;
    // Top rank should not dominate: expected ~100 draws each.
    int max_count = 0;
    for (const auto& [_, c] : counts) max_count = std::max(max_count, c);
    CHECK(max_count < 200);
  }
  SUBCASE("theta one concentrates mass like 1/k") {
    ZipfSampler zipf(1000, 1.0);
    std::map<std::uint64_t, int> counts;
    for (int i = 0; i < 200000; ++i) counts[zipf.sample(rng)]++;
    const double ratio = static_cast<double>(counts[1]) / counts[2];
    CHECK(ratio > 1.7);  // analytic ratio is 2
    CHECK(ratio < 2.3);
    CHECK(counts[1] > counts[10]);
  }
}

TEST_CASE("mixed workload follows the 50/30/20 split") {
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Mixed;
  auto trace = generate(spec, 11, 20000, 700);
  std::map<ContractFn, int> by_fn;
  for (const auto& p : trace.proposals) by_fn[p.fn]++;
  const double n = trace.proposals.size();
  CHECK(by_fn[ContractFn::QueryAccount] / n == doctest::Approx(0.50).epsilon(0.05));
  const double single = (by_fn[ContractFn::DepositChecking] + by_fn[ContractFn::WriteCheck] +
                         by_fn[ContractFn::TransactSavings]) /
                        n;
  CHECK(single == doctest::Approx(0.30).epsilon(0.05));
  const double two = (by_fn[ContractFn::SendPayment] + by_fn[ContractFn::Amalgamate]) / n;
  CHECK(two == doctest::Approx(0.20).epsilon(0.05));
}

TEST_CASE("contract read plans and write effects") {
  SUBCASE("create account writes two fresh keys and reads none") {
    Proposal p;
    p.fn = ContractFn::CreateAccount;
    p.args = {20000, 500};
    CHECK(read_plan(p).empty());
    auto result = apply_contract(p, {});
    CHECK_FALSE(result.app_error);
    CHECK(result.writes.size() == 2);
    CHECK(result.writes.at(checking_key(20000)) == 500);
    CHECK(result.writes.at(saving_key(20000)) == 500);
  }
  SUBCASE("send payment moves the amount between checking balances") {
    Proposal p;
    p.fn = ContractFn::SendPayment;
    p.args = {1, 2, 300};
    auto keys = read_plan(p);
    CHECK(keys == std::vector<Key>{checking_key(1), checking_key(2)});
    std::map<Key, std::optional<Value>> reads{{checking_key(1), 1000},
                                              {checking_key(2), 50}};
    auto result = apply_contract(p, reads);
    REQUIRE_FALSE(result.app_error);
    CHECK(result.writes.at(checking_key(1)) == 700);
    CHECK(result.writes.at(checking_key(2)) == 350);
  }
  SUBCASE("insufficient funds is an application error") {
    Proposal p;
    p.fn = ContractFn::SendPayment;
    p.args = {1, 2, 3000};
    std::map<Key, std::optional<Value>> reads{{checking_key(1), 100},
                                              {checking_key(2), 0}};
    CHECK(apply_contract(p, reads).app_error);
  }
  SUBCASE("missing account is an application error") {
    Proposal p;
    p.fn = ContractFn::DepositChecking;
    p.args = {77, 10};
    std::map<Key, std::optional<Value>> reads{{checking_key(77), std::nullopt}};
    CHECK(apply_contract(p, reads).app_error);
  }
  SUBCASE("amalgamate zeroes the source and credits the target") {
    Proposal p;
    p.fn = ContractFn::Amalgamate;
    p.args = {3, 4};
    std::map<Key, std::optional<Value>> reads{{saving_key(3), 10},
                                              {checking_key(3), 20},
                                              {checking_key(4), 5}};
    auto result = apply_contract(p, reads);
    REQUIRE_FALSE(result.app_error);
    CHECK(result.writes.at(saving_key(3)) == 0);
    CHECK(result.writes.at(checking_key(3)) == 0);
    CHECK(result.writes.at(checking_key(4)) == 35);
  }
}

TEST_CASE("transfer-only mixes conserve total money under serial replay") {
  std::mt19937_64 rng(7);
  std::map<Key, Value> state;
  const int accounts = 50;
  for (int a = 0; a < accounts; ++a) {
    state[checking_key(a)] = 10000;
    state[saving_key(a)] = 10000;
  }
  Value total = 0;
  for (const auto& [_, v] : state) total += v;

  for (int i = 0; i < 2000; ++i) {
    Proposal p;
    p.id = i + 1;
    if (rng() % 2) {
      p.fn = ContractFn::SendPayment;
      std::int64_t a = rng() % accounts, b = (a + 1 + rng() % (accounts - 1)) % accounts;
      p.args = {a, b, static_cast<std::int64_t>(1 + rng() % 100)};
    } else {
      p.fn = ContractFn::Amalgamate;
      std::int64_t a = rng() % accounts, b = (a + 1 + rng() % (accounts - 1)) % accounts;
      p.args = {a, b};
    }
    std::map<Key, std::optional<Value>> reads;
    for (const Key& key : read_plan(p)) reads[key] = state.at(key);
    auto result = apply_contract(p, reads);
    if (result.app_error) continue;
    for (const auto& [key, value] : result.writes) state[key] = value;
  }
  Value after = 0;
  for (const auto& [_, v] : state) after += v;
  CHECK(after == total);
}

TEST_CASE("traces round-trip losslessly through files") {
  WorkloadSpec spec;
  spec.kind = WorkloadKind::Mixed;
  auto trace = generate(spec, 21, 300, 700);
  // Include a raw proposal to cover the explicit read/write encoding.
  Proposal raw;
  raw.id = 9999;
  raw.tick = 1234;
  raw.fn = ContractFn::Raw;
  raw.raw_reads = {"A", "B"};
  raw.raw_writes = {{"C", 42}};
  raw.raw_read_gap = 30;
  trace.proposals.push_back(raw);

  const std::string path = "test_trace_roundtrip.jsonl";
  save_trace(trace, path);
  auto loaded = load_trace(path);
  REQUIRE(loaded.proposals.size() == trace.proposals.size());
  for (std::size_t i = 0; i < trace.proposals.size(); ++i) {
    CHECK(loaded.proposals[i].id == trace.proposals[i].id);
    CHECK(loaded.proposals[i].tick == trace.proposals[i].tick);
    CHECK(loaded.proposals[i].fn == trace.proposals[i].fn);
    CHECK(loaded.proposals[i].args == trace.proposals[i].args);
  }
  CHECK(loaded.proposals.back().raw_reads == raw.raw_reads);
  CHECK(loaded.proposals.back().raw_writes == raw.raw_writes);
  CHECK(loaded.proposals.back().raw_read_gap == raw.raw_read_gap);
  std::remove(path.c_str());
}

TEST_CASE("malformed trace lines report their line number") {
  const std::string path = "test_trace_bad.jsonl";
  {
    FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"id\":1,\"tick\":0,\"fn\":\"noop\",\"args\":[]}\n", f);
    std::fputs("not json\n", f);
    std::fclose(f);
  }
  try {
    load_trace(path);
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("hot set is a stable prefix and spec validation rejects bad ratios") {
  WorkloadSpec spec;
  spec.accounts = 1000;
  spec.hot_fraction = 0.013;
  CHECK(spec.hot_accounts() == 13);
  spec.write_hot_ratio = 51;
  CHECK_THROWS(spec.validate());
}
