#include "eov/workload.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace eov {

using nlohmann::json;

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::ModifiedSmallbank: return "modified_smallbank";
    case WorkloadKind::CreateAccount: return "create_account";
    case WorkloadKind::Mixed: return "mixed";
    case WorkloadKind::Noop: return "noop";
    case WorkloadKind::Raw: return "raw";
  }
  return "unknown";
}

WorkloadKind workload_kind_from(const std::string& name) {
  if (name == "modified_smallbank") return WorkloadKind::ModifiedSmallbank;
  if (name == "create_account") return WorkloadKind::CreateAccount;
  if (name == "mixed") return WorkloadKind::Mixed;
  if (name == "noop") return WorkloadKind::Noop;
  if (name == "raw") return WorkloadKind::Raw;
  throw std::runtime_error("unknown workload: " + name);
}

const char* to_string(ContractFn fn) {
  switch (fn) {
    case ContractFn::Noop: return "noop";
    case ContractFn::Raw: return "raw";
    case ContractFn::ModifiedSmallbank: return "modified_smallbank";
    case ContractFn::QueryAccount: return "query_account";
    case ContractFn::DepositChecking: return "deposit_checking";
    case ContractFn::WriteCheck: return "write_check";
    case ContractFn::TransactSavings: return "transact_savings";
    case ContractFn::SendPayment: return "send_payment";
    case ContractFn::Amalgamate: return "amalgamate";
    case ContractFn::CreateAccount: return "create_account";
  }
  return "unknown";
}

ContractFn contract_fn_from(const std::string& name) {
  static const std::map<std::string, ContractFn> table = {
      {"noop", ContractFn::Noop},
      {"raw", ContractFn::Raw},
      {"modified_smallbank", ContractFn::ModifiedSmallbank},
      {"query_account", ContractFn::QueryAccount},
      {"deposit_checking", ContractFn::DepositChecking},
      {"write_check", ContractFn::WriteCheck},
      {"transact_savings", ContractFn::TransactSavings},
      {"send_payment", ContractFn::SendPayment},
      {"amalgamate", ContractFn::Amalgamate},
      {"create_account", ContractFn::CreateAccount},
  };
  auto it = table.find(name);
  if (it == table.end()) throw std::runtime_error("unknown contract fn: " + name);
  return it->second;
}

std::uint32_t WorkloadSpec::hot_accounts() const {
  auto hot = static_cast<std::uint32_t>(std::ceil(accounts * hot_fraction));
  return hot < 1 ? 1 : hot;
}

void WorkloadSpec::validate() const {
  if (write_hot_ratio < 0 || write_hot_ratio > 50 || read_hot_ratio < 0 ||
      read_hot_ratio > 50) {
    throw std::runtime_error("hot ratios must lie in [0, 50]");
  }
  if (accounts == 0) throw std::runtime_error("accounts must be positive");
  if (reads_per_txn < 0 || writes_per_txn < 0) {
    throw std::runtime_error("negative per-txn access count");
  }
}

namespace {

std::string padded(std::int64_t account) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lld", static_cast<long long>(account));
  return buf;
}

constexpr Value kInitialBalance = 10000;

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

Key checking_key(std::int64_t account) { return "a" + padded(account) + "_c"; }
Key saving_key(std::int64_t account) { return "a" + padded(account) + "_s"; }

std::vector<std::pair<Key, Value>> preload_entries(const WorkloadSpec& spec) {
  std::vector<std::pair<Key, Value>> out;
  if (spec.kind == WorkloadKind::Noop || spec.kind == WorkloadKind::Raw) return out;
  out.reserve(spec.accounts * 2);
  for (std::uint32_t a = 0; a < spec.accounts; ++a) {
    out.push_back({checking_key(a), kInitialBalance});
    out.push_back({saving_key(a), kInitialBalance});
  }
  return out;
}

ZipfSampler::ZipfSampler(std::uint64_t n, double theta) : n_(n), theta_(theta) {
  h_x1_ = h_integral(1.5) - 1.0;
  h_n_ = h_integral(static_cast<double>(n) + 0.5);
  s_ = 2.0 - h_integral_inverse(h_integral(2.5) - h(2.0));
}

namespace {

double helper1(double x) {
  if (std::abs(x) > 1e-8) return std::log1p(x) / x;
  return 1.0 - x / 2.0 + x * x / 3.0;
}

double helper2(double x) {
  if (std::abs(x) > 1e-8) return std::expm1(x) / x;
  return 1.0 + x / 2.0 + x * x / 6.0;
}

}  // namespace

double ZipfSampler::h_integral(double x) const {
  const double log_x = std::log(x);
  return helper2((1.0 - theta_) * log_x) * log_x;
}

double ZipfSampler::h(double x) const { return std::exp(-theta_ * std::log(x)); }

double ZipfSampler::h_integral_inverse(double x) const {
  double t = x * (1.0 - theta_);
  if (t < -1.0) t = -1.0;
  return std::exp(helper1(t) * x);
}

std::uint64_t ZipfSampler::sample(std::mt19937_64& rng) const {
  while (true) {
    const double u = h_n_ + unit_double(rng) * (h_x1_ - h_n_);
    const double x = h_integral_inverse(u);
    std::uint64_t k = static_cast<std::uint64_t>(x + 0.5);
    if (k < 1) k = 1;
    if (k > n_) k = n_;
    if (static_cast<double>(k) - x <= s_ ||
        u >= h_integral(static_cast<double>(k) + 0.5) - h(static_cast<double>(k))) {
      return k;
    }
  }
}

namespace {

// Picks an account: hot prefix with probability ratio/100, uniform cold
// otherwise.
std::int64_t pick_account(std::mt19937_64& rng, const WorkloadSpec& spec, int ratio) {
  const std::uint32_t hot = spec.hot_accounts();
  const bool go_hot = rng() % 10000 < static_cast<std::uint64_t>(ratio) * 100;
  if (go_hot || hot >= spec.accounts) return static_cast<std::int64_t>(rng() % hot);
  return static_cast<std::int64_t>(hot + rng() % (spec.accounts - hot));
}

std::vector<std::int64_t> pick_distinct(std::mt19937_64& rng, const WorkloadSpec& spec,
                                        int ratio, int count) {
  std::set<std::int64_t> seen;
  std::vector<std::int64_t> out;
  while (static_cast<int>(out.size()) < count) {
    auto account = pick_account(rng, spec, ratio);
    if (seen.insert(account).second) out.push_back(account);
  }
  return out;
}

}  // namespace

Trace generate(const WorkloadSpec& spec, std::uint64_t seed, std::uint64_t n,
               std::uint32_t rate_per_1000_ticks) {
  spec.validate();
  if (rate_per_1000_ticks == 0) throw std::runtime_error("rate must be positive");
  Trace trace;
  trace.proposals.reserve(n);
  std::mt19937_64 rng(seed);
  ZipfSampler zipf(spec.accounts, spec.zipf_theta);
  std::int64_t next_fresh = spec.accounts;

  for (std::uint64_t i = 0; i < n; ++i) {
    Proposal p;
    p.id = i + 1;
    p.tick = i * 1000ull / rate_per_1000_ticks;
    switch (spec.kind) {
      case WorkloadKind::Noop:
        p.fn = ContractFn::Noop;
        break;
      case WorkloadKind::ModifiedSmallbank: {
        p.fn = ContractFn::ModifiedSmallbank;
        auto reads = pick_distinct(rng, spec, spec.read_hot_ratio, spec.reads_per_txn);
        auto writes = pick_distinct(rng, spec, spec.write_hot_ratio, spec.writes_per_txn);
        p.args.insert(p.args.end(), reads.begin(), reads.end());
        p.args.insert(p.args.end(), writes.begin(), writes.end());
        break;
      }
      case WorkloadKind::CreateAccount:
        p.fn = ContractFn::CreateAccount;
        p.args = {next_fresh++, kInitialBalance};
        break;
      case WorkloadKind::Mixed: {
        const std::uint64_t roll = rng() % 100;
        auto a = static_cast<std::int64_t>(zipf.sample(rng) - 1);
        if (roll < 50) {
          p.fn = ContractFn::QueryAccount;
          p.args = {a};
        } else if (roll < 80) {
          const std::uint64_t which = rng() % 3;
          const auto amount = static_cast<std::int64_t>(1 + rng() % 100);
          p.fn = which == 0   ? ContractFn::DepositChecking
                 : which == 1 ? ContractFn::WriteCheck
                              : ContractFn::TransactSavings;
          p.args = {a, amount};
        } else {
          std::int64_t b = a;
          while (b == a) b = static_cast<std::int64_t>(zipf.sample(rng) - 1);
          if (rng() % 2 == 0) {
            p.fn = ContractFn::SendPayment;
            p.args = {a, b, static_cast<std::int64_t>(1 + rng() % 100)};
          } else {
            p.fn = ContractFn::Amalgamate;
            p.args = {a, b};
          }
        }
        break;
      }
      case WorkloadKind::Raw:
        throw std::runtime_error("raw traces are hand-written, not generated");
    }
    trace.proposals.push_back(std::move(p));
  }
  return trace;
}

std::vector<Key> read_plan(const Proposal& p) {
  switch (p.fn) {
    case ContractFn::Noop:
    case ContractFn::CreateAccount:
      return {};
    case ContractFn::Raw:
      return p.raw_reads;
    case ContractFn::ModifiedSmallbank: {
      std::vector<Key> keys;
      const int reads = static_cast<int>(p.args.size()) / 2;
      for (int i = 0; i < reads; ++i) keys.push_back(checking_key(p.args[i]));
      return keys;
    }
    case ContractFn::QueryAccount:
      return {saving_key(p.args[0]), checking_key(p.args[0])};
    case ContractFn::DepositChecking:
      return {checking_key(p.args[0])};
    case ContractFn::WriteCheck:
      return {saving_key(p.args[0]), checking_key(p.args[0])};
    case ContractFn::TransactSavings:
      return {saving_key(p.args[0])};
    case ContractFn::SendPayment:
      return {checking_key(p.args[0]), checking_key(p.args[1])};
    case ContractFn::Amalgamate:
      return {saving_key(p.args[0]), checking_key(p.args[0]), checking_key(p.args[1])};
  }
  return {};
}

ContractResult apply_contract(const Proposal& p,
                              const std::map<Key, std::optional<Value>>& reads) {
  ContractResult result;
  auto need = [&](const Key& key) -> std::optional<Value> {
    auto it = reads.find(key);
    if (it == reads.end() || !it->second) {
      result.app_error = true;
      result.error = "missing account entry: " + key;
      return std::nullopt;
    }
    return *it->second;
  };

  switch (p.fn) {
    case ContractFn::Noop:
      break;
    case ContractFn::Raw:
      for (const Key& key : p.raw_reads) {
        need(key);
        if (result.app_error) return result;
      }
      result.writes = p.raw_writes;
      break;
    case ContractFn::ModifiedSmallbank: {
      const int count = static_cast<int>(p.args.size()) / 2;
      Value sum = 0;
      for (int i = 0; i < count; ++i) {
        auto v = need(checking_key(p.args[i]));
        if (result.app_error) return result;
        sum += *v;
      }
      for (int i = 0; i < count; ++i) {
        result.writes[checking_key(p.args[count + i])] =
            sum % 1000 + i + static_cast<Value>(p.id % 997);
      }
      break;
    }
    case ContractFn::QueryAccount:
      need(saving_key(p.args[0]));
      if (!result.app_error) need(checking_key(p.args[0]));
      break;
    case ContractFn::DepositChecking: {
      auto c = need(checking_key(p.args[0]));
      if (result.app_error) return result;
      result.writes[checking_key(p.args[0])] = *c + p.args[1];
      break;
    }
    case ContractFn::WriteCheck: {
      auto s = need(saving_key(p.args[0]));
      if (result.app_error) return result;
      auto c = need(checking_key(p.args[0]));
      if (result.app_error) return result;
      const Value amount = p.args[1];
      const Value penalty = (*s + *c < amount) ? 1 : 0;
      result.writes[checking_key(p.args[0])] = *c - amount - penalty;
      break;
    }
    case ContractFn::TransactSavings: {
      auto s = need(saving_key(p.args[0]));
      if (result.app_error) return result;
      result.writes[saving_key(p.args[0])] = *s + p.args[1];
      break;
    }
    case ContractFn::SendPayment: {
      auto from = need(checking_key(p.args[0]));
      if (result.app_error) return result;
      auto to = need(checking_key(p.args[1]));
      if (result.app_error) return result;
      const Value amount = p.args[2];
      if (*from < amount) {
        result.app_error = true;
        result.error = "insufficient funds";
        return result;
      }
      result.writes[checking_key(p.args[0])] = *from - amount;
      result.writes[checking_key(p.args[1])] = *to + amount;
      break;
    }
    case ContractFn::Amalgamate: {
      auto s = need(saving_key(p.args[0]));
      if (result.app_error) return result;
      auto c = need(checking_key(p.args[0]));
      if (result.app_error) return result;
      auto bc = need(checking_key(p.args[1]));
      if (result.app_error) return result;
      result.writes[saving_key(p.args[0])] = 0;
      result.writes[checking_key(p.args[0])] = 0;
      result.writes[checking_key(p.args[1])] = *bc + *s + *c;
      break;
    }
    case ContractFn::CreateAccount:
      result.writes[checking_key(p.args[0])] = p.args[1];
      result.writes[saving_key(p.args[0])] = p.args[1];
      break;
  }
  return result;
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  for (const auto& p : trace.proposals) {
    json line = {{"id", p.id}, {"tick", p.tick}, {"fn", to_string(p.fn)}, {"args", p.args}};
    if (p.fn == ContractFn::Raw) {
      line["reads"] = p.raw_reads;
      line["writes"] = p.raw_writes;
      if (p.raw_read_gap) line["gap"] = *p.raw_read_gap;
    }
    out << line.dump() << '\n';
  }
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
      Proposal p;
      p.id = parsed.at("id").get<TxnId>();
      p.tick = parsed.at("tick").get<std::uint64_t>();
      p.fn = contract_fn_from(parsed.at("fn").get<std::string>());
      p.args = parsed.at("args").get<std::vector<std::int64_t>>();
      if (p.fn == ContractFn::Raw) {
        p.raw_reads = parsed.at("reads").get<std::vector<Key>>();
        p.raw_writes = parsed.at("writes").get<std::map<Key, Value>>();
        if (parsed.contains("gap")) p.raw_read_gap = parsed["gap"].get<std::uint64_t>();
      }
      trace.proposals.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error("trace parse error at line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  return trace;
}

}  // namespace eov
