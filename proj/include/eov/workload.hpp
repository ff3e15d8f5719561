#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eov/core.hpp"

namespace eov {

enum class WorkloadKind : std::uint8_t {
  ModifiedSmallbank,
  CreateAccount,
  Mixed,
  Noop,
  Raw,  // proposals carry explicit read/write sets (hand-written traces)
};

const char* to_string(WorkloadKind k);
WorkloadKind workload_kind_from(const std::string& name);

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::ModifiedSmallbank;
  std::uint32_t accounts = 10000;
  double hot_fraction = 0.01;
  int write_hot_ratio = 10;  // percent, 0..50
  int read_hot_ratio = 10;   // percent, 0..50
  double zipf_theta = 0.5;   // skew for the mixed workload
  int reads_per_txn = 4;
  int writes_per_txn = 4;

  std::uint32_t hot_accounts() const;
  void validate() const;
};

enum class ContractFn : std::uint8_t {
  Noop,
  Raw,
  ModifiedSmallbank,
  QueryAccount,
  DepositChecking,
  WriteCheck,
  TransactSavings,
  SendPayment,
  Amalgamate,
  CreateAccount,
};

const char* to_string(ContractFn fn);
ContractFn contract_fn_from(const std::string& name);

struct Proposal {
  TxnId id = 0;
  std::uint64_t tick = 0;
  ContractFn fn = ContractFn::Noop;
  std::vector<std::int64_t> args;
  // Raw proposals only:
  std::vector<Key> raw_reads;
  std::map<Key, Value> raw_writes;
  std::optional<std::uint64_t> raw_read_gap;  // overrides the config read interval
};

struct Trace {
  std::vector<Proposal> proposals;
};

Key checking_key(std::int64_t account);
Key saving_key(std::int64_t account);

/// Genesis entries backing a workload: every account's checking and saving
/// balance, preloaded to 10000 units.
std::vector<std::pair<Key, Value>> preload_entries(const WorkloadSpec& spec);

/// Deterministic open-loop trace: proposal i is submitted at tick
/// floor(i * 1000 / rate).
Trace generate(const WorkloadSpec& spec, std::uint64_t seed, std::uint64_t n,
               std::uint32_t rate_per_1000_ticks);

/// Ordered keys the contract reads.
std::vector<Key> read_plan(const Proposal& p);

struct ContractResult {
  std::map<Key, Value> writes;
  bool app_error = false;
  std::string error;
};

/// Computes the writeset from the values read. Missing accounts and
/// insufficient transfer balances surface as application errors.
ContractResult apply_contract(const Proposal& p,
                              const std::map<Key, std::optional<Value>>& reads);

void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

/// Zipfian sampler over [1, n] by rejection inversion; theta = 0 degrades
/// to the uniform distribution.
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double theta);
  std::uint64_t sample(std::mt19937_64& rng) const;

 private:
  double h_integral(double x) const;
  double h(double x) const;
  double h_integral_inverse(double x) const;

  std::uint64_t n_;
  double theta_;
  double h_x1_;
  double h_n_;
  double s_;
};

}  // namespace eov
