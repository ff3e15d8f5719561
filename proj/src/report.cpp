#include "eov/report.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eov::report {

using nlohmann::json;

namespace {

json hist_json(const Histogram& h) {
  auto s = h.summary();
  return {{"count", s.count}, {"mean", s.mean},   {"p50", s.p50},
          {"p90", s.p90},     {"p99", s.p99},     {"max", s.max}};
}

json config_json(const SimConfig& cfg) {
  return {
      {"policy", cfg.policy},
      {"block_size", cfg.block_size},
      {"block_timeout", cfg.block_timeout},
      {"max_span", cfg.max_span},
      {"rate", cfg.request_rate},
      {"client_delay", cfg.client_delay},
      {"read_interval", cfg.read_interval},
      {"validation_cost", cfg.validation_cost},
      {"seed", cfg.seed},
      {"reach", cfg.reach == ReachMode::Bloom ? "bloom" : "exact"},
      {"txns", cfg.run_length},
      {"workload",
       {{"kind", to_string(cfg.workload.kind)},
        {"accounts", cfg.workload.accounts},
        {"hot_fraction", cfg.workload.hot_fraction},
        {"write_hot", cfg.workload.write_hot_ratio},
        {"read_hot", cfg.workload.read_hot_ratio},
        {"zipf_theta", cfg.workload.zipf_theta},
        {"reads_per_txn", cfg.workload.reads_per_txn},
        {"writes_per_txn", cfg.workload.writes_per_txn}}},
  };
}

json metrics_to_json(const Metrics& m, bool include_wall_clock) {
  json latency = {{"pending_wait_ticks", hist_json(m.pending_wait_ticks)},
                  {"validation_ticks", hist_json(m.validation_ticks)},
                  {"e2e_ticks", hist_json(m.e2e_ticks)}};
  if (include_wall_clock) {
    latency["arrival_processing_us"] = hist_json(m.admit_us);
    latency["reordering_us"] = hist_json(m.reorder_us);
  }
  return {
      {"submitted", m.submitted},
      {"app_errors", m.app_errors},
      {"arrivals", m.arrivals},
      {"in_ledger", m.in_ledger},
      {"committed", m.committed},
      {"aborts",
       {{"early", m.aborted_early},
        {"unreorderable", m.aborted_unreorderable},
        {"stale_span", m.aborted_stale_span},
        {"validation", m.aborted_validation},
        {"false_positive", m.aborted_false_positive}}},
      {"resimulations", m.resimulations},
      {"duration_ticks", m.duration_ticks},
      {"raw_throughput", m.raw_throughput},
      {"effective_throughput", m.effective_throughput},
      {"latency", latency},
      {"graph",
       {{"admitted", m.graph.admitted},
        {"cycle_tests", m.graph.cycle_tests},
        {"traversals_skipped", m.graph.traversals_skipped},
        {"nodes_traversed", m.graph.nodes_traversed},
        {"ww_edges_restored", m.graph.ww_edges_restored},
        {"restore_sweep_visits", m.graph.restore_sweep_visits},
        {"pruned_nodes", m.graph.pruned_nodes},
        {"max_nodes", m.graph.max_nodes}}},
  };
}

json txn_json(const Transaction& t) {
  json reads = json::object();
  for (const auto& [key, version] : t.readset) reads[key] = version.str();
  json j = {{"id", t.id},
            {"start", t.start_ts.str()},
            {"status", to_string(t.status)},
            {"reads", reads},
            {"writes", t.writeset}};
  if (t.end_ts) j["end"] = t.end_ts->str();
  return j;
}

Transaction txn_from_json(const json& j) {
  Transaction t;
  t.id = j.at("id").get<TxnId>();
  t.start_ts = SeqNum::parse(j.at("start").get<std::string>());
  if (j.contains("end")) t.end_ts = SeqNum::parse(j["end"].get<std::string>());
  const std::string status = j.at("status").get<std::string>();
  for (auto s : {TxnStatus::Pending, TxnStatus::Committed, TxnStatus::AbortedEarly,
                 TxnStatus::AbortedUnreorderable, TxnStatus::AbortedStaleSpan,
                 TxnStatus::AbortedValidation, TxnStatus::AbortedFalsePositive}) {
    if (status == to_string(s)) t.status = s;
  }
  for (const auto& [key, version] : j.at("reads").items()) {
    t.readset[key] = SeqNum::parse(version.get<std::string>());
  }
  t.writeset = j.at("writes").get<std::map<Key, Value>>();
  return t;
}

}  // namespace

std::string metrics_json(const RunResult& result) {
  json j = {{"config", config_json(result.cfg)},
            {"metrics", metrics_to_json(result.metrics, true)}};
  return j.dump(2);
}

std::string csv_header() {
  return "policy,block_size,write_hot,read_hot,client_delay,read_interval,seed,"
         "raw,effective,abort_early,abort_unreorderable,abort_stale_span,"
         "abort_validation,abort_false_positive,app_errors";
}

std::string csv_row(const RunResult& result) {
  const auto& m = result.metrics;
  const auto& c = result.cfg;
  std::ostringstream out;
  out << c.policy << ',' << c.block_size << ',' << c.workload.write_hot_ratio << ','
      << c.workload.read_hot_ratio << ',' << c.client_delay << ',' << c.read_interval
      << ',' << c.seed << ',';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f,%.3f", m.raw_throughput, m.effective_throughput);
  out << buf << ',' << m.aborted_early << ',' << m.aborted_unreorderable << ','
      << m.aborted_stale_span << ',' << m.aborted_validation << ','
      << m.aborted_false_positive << ',' << m.app_errors;
  return out.str();
}

void save_ledger(const RunResult& result, const std::string& path) {
  json blocks = json::array();
  for (const auto& block : result.ledger.blocks) {
    json txns = json::array();
    for (TxnId id : block.txns) txns.push_back(txn_json(result.ledger.txns.at(id)));
    blocks.push_back({{"number", block.number}, {"txns", txns}});
  }
  json rejected = json::array();
  for (const auto& [id, status] : result.ledger.rejected) {
    rejected.push_back({{"id", id}, {"status", to_string(status)}});
  }
  // Wall-clock timings stay out of the ledger file so identical runs
  // produce identical bytes.
  json j = {{"config", config_json(result.cfg)},
            {"blocks", blocks},
            {"rejected", rejected},
            {"metrics", metrics_to_json(result.metrics, false)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ledger: " + path);
  out << j.dump(2) << '\n';
}

namespace {

SimConfig config_from_json(const json& j, SimConfig cfg) {
  for (const auto& [key, value] : j.items()) {
    if (key == "policy") cfg.policy = value.get<std::string>();
    else if (key == "block_size") cfg.block_size = value.get<std::uint32_t>();
    else if (key == "block_timeout") cfg.block_timeout = value.get<std::uint64_t>();
    else if (key == "max_span") cfg.max_span = value.get<std::uint32_t>();
    else if (key == "rate") cfg.request_rate = value.get<std::uint32_t>();
    else if (key == "client_delay") cfg.client_delay = value.get<std::uint64_t>();
    else if (key == "read_interval") cfg.read_interval = value.get<std::uint64_t>();
    else if (key == "validation_cost") cfg.validation_cost = value.get<std::uint64_t>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "txns") cfg.run_length = value.get<std::uint64_t>();
    else if (key == "reach") {
      cfg.reach = value.get<std::string>() == "exact" ? ReachMode::Exact : ReachMode::Bloom;
    } else if (key == "workload") {
      for (const auto& [wk, wv] : value.items()) {
        if (wk == "kind") cfg.workload.kind = workload_kind_from(wv.get<std::string>());
        else if (wk == "accounts") cfg.workload.accounts = wv.get<std::uint32_t>();
        else if (wk == "hot_fraction") cfg.workload.hot_fraction = wv.get<double>();
        else if (wk == "write_hot") cfg.workload.write_hot_ratio = wv.get<int>();
        else if (wk == "read_hot") cfg.workload.read_hot_ratio = wv.get<int>();
        else if (wk == "zipf_theta") cfg.workload.zipf_theta = wv.get<double>();
        else if (wk == "reads_per_txn") cfg.workload.reads_per_txn = wv.get<int>();
        else if (wk == "writes_per_txn") cfg.workload.writes_per_txn = wv.get<int>();
        else throw ConfigError("unknown workload config field: " + wk);
      }
    } else {
      throw ConfigError("unknown config field: " + key);
    }
  }
  return cfg;
}

}  // namespace

SimConfig config_from_json_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  in >> j;
  return config_from_json(j, std::move(base));
}

LoadedLedger load_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ledger: " + path);
  json j;
  in >> j;
  LoadedLedger loaded;
  loaded.cfg = config_from_json(j.at("config"), SimConfig{});
  for (const auto& jb : j.at("blocks")) {
    Block block;
    block.number = jb.at("number").get<std::uint32_t>();
    for (const auto& jt : jb.at("txns")) {
      Transaction t = txn_from_json(jt);
      block.txns.push_back(t.id);
      block.statuses.push_back(t.status);
      loaded.ledger.txns[t.id] = std::move(t);
    }
    loaded.ledger.blocks.push_back(std::move(block));
  }
  return loaded;
}

}  // namespace eov::report
