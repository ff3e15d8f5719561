#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#ifdef EOV_HAVE_OPENMP
#include <omp.h>
#endif

#include "eov/oracle.hpp"
#include "eov/pipeline.hpp"
#include "eov/report.hpp"

namespace {

using namespace eov;

bool log_enabled() {
  const char* level = std::getenv("EOV_LOG");
  return level && std::string(level) != "off" && std::string(level) != "";
}

struct ConfigFlags {
  SimConfig cfg;
  std::string reach = "bloom";
  std::string workload = "modified_smallbank";
  std::string config_path;

  CLI::Option* policy = nullptr;
  CLI::Option* block_size = nullptr;
  CLI::Option* block_timeout = nullptr;
  CLI::Option* write_hot = nullptr;
  CLI::Option* read_hot = nullptr;
  CLI::Option* client_delay = nullptr;
  CLI::Option* read_interval = nullptr;
  CLI::Option* max_span = nullptr;
  CLI::Option* rate = nullptr;
  CLI::Option* txns = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* reach_opt = nullptr;
  CLI::Option* workload_opt = nullptr;
  CLI::Option* accounts = nullptr;
  CLI::Option* zipf = nullptr;
  CLI::Option* config_opt = nullptr;

  void attach(CLI::App* app) {
    policy = app->add_option("--policy", cfg.policy,
                             "concurrency control policy "
                             "{fabric, fabricpp, focc-s, focc-l, sharp}");
    block_size = app->add_option("--block-size", cfg.block_size, "transactions per block");
    block_timeout =
        app->add_option("--block-timeout", cfg.block_timeout, "block timeout in ticks");
    write_hot = app->add_option("--write-hot", cfg.workload.write_hot_ratio,
                                "write hot ratio in percent");
    read_hot = app->add_option("--read-hot", cfg.workload.read_hot_ratio,
                               "read hot ratio in percent");
    client_delay = app->add_option("--client-delay", cfg.client_delay,
                                   "client broadcast delay in ticks");
    read_interval = app->add_option("--read-interval", cfg.read_interval,
                                    "ticks between consecutive reads");
    max_span = app->add_option("--max-span", cfg.max_span, "maximum block span");
    rate = app->add_option("--rate", cfg.request_rate, "requests per 1000 ticks");
    txns = app->add_option("--txns", cfg.run_length, "total transactions");
    seed = app->add_option("--seed", cfg.seed, "workload seed");
    reach_opt = app->add_option("--reach", reach, "reachability mode {bloom, exact}");
    workload_opt = app->add_option("--workload", workload,
                                   "workload kind {modified_smallbank, create_account, "
                                   "mixed, noop}");
    accounts = app->add_option("--accounts", cfg.workload.accounts, "account count");
    zipf = app->add_option("--zipf", cfg.workload.zipf_theta,
                           "zipfian skew for the mixed workload");
    config_opt = app->add_option("--config", config_path, "JSON config file");
  }

  // Config file first, then explicit flags on top.
  SimConfig resolve() const {
    SimConfig out;
    if (!config_path.empty()) out = report::config_from_json_file(config_path, out);
    auto apply = [](CLI::Option* opt, auto& dst, const auto& src) {
      if (opt && opt->count() > 0) dst = src;
    };
    apply(policy, out.policy, cfg.policy);
    apply(block_size, out.block_size, cfg.block_size);
    apply(block_timeout, out.block_timeout, cfg.block_timeout);
    apply(write_hot, out.workload.write_hot_ratio, cfg.workload.write_hot_ratio);
    apply(read_hot, out.workload.read_hot_ratio, cfg.workload.read_hot_ratio);
    apply(client_delay, out.client_delay, cfg.client_delay);
    apply(read_interval, out.read_interval, cfg.read_interval);
    apply(max_span, out.max_span, cfg.max_span);
    apply(rate, out.request_rate, cfg.request_rate);
    apply(txns, out.run_length, cfg.run_length);
    apply(seed, out.seed, cfg.seed);
    apply(accounts, out.workload.accounts, cfg.workload.accounts);
    apply(zipf, out.workload.zipf_theta, cfg.workload.zipf_theta);
    if (reach_opt && reach_opt->count() > 0) {
      if (reach != "bloom" && reach != "exact") throw ConfigError("--reach must be bloom or exact");
      out.reach = reach == "exact" ? ReachMode::Exact : ReachMode::Bloom;
    }
    if (workload_opt && workload_opt->count() > 0) {
      out.workload.kind = workload_kind_from(workload);
    }
    return out;
  }
};

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw ConfigError("empty --values list");
  return out;
}

std::vector<std::string> parse_policies(const std::string& csv) {
  if (csv == "all") return {"fabric", "fabricpp", "focc-s", "focc-l", "sharp"};
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty --policies list");
  return out;
}

SimConfig apply_axis(SimConfig cfg, const std::string& axis, double value) {
  if (axis == "block-size") cfg.block_size = static_cast<std::uint32_t>(value);
  else if (axis == "write-hot") cfg.workload.write_hot_ratio = static_cast<int>(value);
  else if (axis == "read-hot") cfg.workload.read_hot_ratio = static_cast<int>(value);
  else if (axis == "client-delay") cfg.client_delay = static_cast<std::uint64_t>(value);
  else if (axis == "read-interval") cfg.read_interval = static_cast<std::uint64_t>(value);
  else if (axis == "zipf") cfg.workload.zipf_theta = value;
  else if (axis == "max-span") cfg.max_span = static_cast<std::uint32_t>(value);
  else throw ConfigError("unknown sweep axis: " + axis);
  return cfg;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

int cmd_run(const ConfigFlags& flags, const std::string& trace_path,
            const std::string& out_path, const std::string& format,
            const std::string& ledger_path) {
  SimConfig cfg = flags.resolve();
  cfg.validate();
  if (log_enabled()) {
    std::cerr << "run: policy=" << cfg.policy << " txns=" << cfg.run_length
              << " seed=" << cfg.seed << '\n';
  }
  RunResult result;
  if (!trace_path.empty()) {
    Trace trace = load_trace(trace_path);
    result = run_with_trace(cfg, trace);
  } else {
    result = run(cfg);
  }
  if (log_enabled()) {
    std::cerr << "run: " << result.ledger.blocks.size() << " blocks, "
              << result.metrics.committed << " committed\n";
  }
  if (format == "csv") {
    write_output(report::csv_header() + "\n" + report::csv_row(result), out_path);
  } else if (format == "json") {
    write_output(report::metrics_json(result), out_path);
  } else {
    throw ConfigError("unknown format: " + format);
  }
  if (!ledger_path.empty()) report::save_ledger(result, ledger_path);
  return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& axis, const std::string& values,
              const std::string& policies, const std::string& seeds,
              const std::string& out_path, const std::string& format) {
  const SimConfig base = flags.resolve();
  const auto axis_values = parse_values(values);
  const auto policy_list = parse_policies(policies);
  std::vector<std::uint64_t> seed_list;
  for (double s : parse_values(seeds)) seed_list.push_back(static_cast<std::uint64_t>(s));

  struct Point {
    SimConfig cfg;
  };
  std::vector<Point> points;
  for (double value : axis_values) {
    for (std::uint64_t seed : seed_list) {
      for (const auto& policy : policy_list) {
        SimConfig cfg = apply_axis(base, axis, value);
        cfg.policy = policy;
        cfg.seed = seed;
        cfg.validate();
        points.push_back({std::move(cfg)});
      }
    }
  }

  std::vector<RunResult> results(points.size());
#ifdef EOV_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < points.size(); ++i) {
    results[i] = run(points[i].cfg);
    if (log_enabled()) {
#ifdef EOV_HAVE_OPENMP
#pragma omp critical
#endif
      std::cerr << "sweep point " << i + 1 << "/" << points.size() << " done\n";
    }
  }

  std::ostringstream out;
  if (format == "csv") {
    out << report::csv_header() << '\n';
    for (const auto& r : results) out << report::csv_row(r) << '\n';
  } else if (format == "json") {
    out << '[';
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (i) out << ',';
      out << '\n' << report::metrics_json(results[i]);
    }
    out << "\n]\n";
  } else {
    throw ConfigError("unknown format: " + format);
  }
  write_output(out.str(), out_path);
  return 0;
}

int cmd_verify(const std::string& ledger_path) {
  auto loaded = report::load_ledger(ledger_path);
  auto committed = loaded.ledger.committed_in_order();
  auto verdict = oracle::verify_serializable(committed);
  if (verdict.ok) {
    std::cout << "ok: " << committed.size() << " committed transactions, conflict graph acyclic\n";
    return 0;
  }
  std::cout << "violation: dependency cycle among committed transactions:";
  for (TxnId id : verdict.cycle) std::cout << ' ' << id;
  std::cout << '\n';
  return 1;
}

int cmd_gen_trace(const ConfigFlags& flags, const std::string& out_path) {
  SimConfig cfg = flags.resolve();
  cfg.validate();
  Trace trace = generate(cfg.workload, cfg.seed, cfg.run_length, cfg.request_rate);
  save_trace(trace, out_path);
  std::cout << "wrote " << trace.proposals.size() << " proposals to " << out_path << '\n';
  return 0;
}

// Ordering-side microbenchmark: admissions and block formations against the
// dependency graph, no event loop around them.
int cmd_bench(const ConfigFlags& flags) {
  SimConfig cfg = flags.resolve();
  cfg.validate();
  Trace trace = generate(cfg.workload, cfg.seed, cfg.run_length, cfg.request_rate);

  MvStore store;
  store.preload(preload_entries(cfg.workload));
  DepGraphConfig gc{cfg.max_span, cfg.reach, BloomParams{}};
  DepGraph graph(gc);

  std::map<TxnId, Transaction> admitted;
  std::vector<TxnId> batch;
  std::uint64_t operations = 0;

  auto started = std::chrono::steady_clock::now();
  for (const auto& proposal : trace.proposals) {
    Endorsement e = simulate(proposal, store, proposal.tick, 0);
    if (e.app_error) continue;
    if (graph.admit_transaction(e.txn) == AdmitResult::Reorderable) {
      admitted.emplace(e.txn.id, e.txn);
      batch.push_back(e.txn.id);
    }
    ++operations;
    if (batch.size() >= cfg.block_size) {
      const std::uint32_t block_number = graph.next_block();
      auto order = graph.form_block();
      graph.commit_block(block_number, order);
      graph.prune();
      ++operations;

      Block block;
      block.number = block_number;
      std::vector<MvStore::CommitEffect> effects;
      std::uint32_t pos = 1;
      for (TxnId id : order) {
        effects.push_back({pos++, &admitted.at(id).writeset});
      }
      store.apply_block(block_number, effects);
      for (TxnId id : order) admitted.erase(id);
      batch.clear();
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const double per_minute = static_cast<double>(operations) * 60.0 / secs;
  std::cout << "ordering-side: " << operations << " admit+form_block operations in "
            << secs << " s = " << static_cast<std::uint64_t>(per_minute) << " ops/min\n";

#ifdef EOV_HAVE_OPENMP
  // Sweep kernel, serial vs parallel, identical outputs required.
  SimConfig small = cfg;
  small.run_length = std::min<std::uint64_t>(cfg.run_length, 4000);
  std::vector<SimConfig> points;
  for (auto policy : {"fabric", "sharp"}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
      SimConfig p = small;
      p.policy = policy;
      p.seed = seed;
      points.push_back(p);
    }
  }
  auto run_all = [&](bool parallel) {
    std::vector<std::string> rows(points.size());
    auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::size_t i = 0; i < points.size(); ++i) {
      rows[i] = report::csv_row(run(points[i]));
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return std::make_pair(rows, dt);
  };
  auto [serial_rows, serial_s] = run_all(false);
  auto [parallel_rows, parallel_s] = run_all(true);
  std::cout << "sweep kernel: serial " << serial_s << " s, parallel (" << omp_get_max_threads()
            << " threads) " << parallel_s << " s, outputs "
            << (serial_rows == parallel_rows ? "identical" : "DIVERGENT") << '\n';
  if (serial_rows != parallel_rows) return 1;
#endif
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execute-order-validate transaction pipeline simulator"};
  app.require_subcommand(1);

  ConfigFlags run_flags, sweep_flags, gen_flags, bench_flags;
  std::string trace_path, out_path, ledger_path;
  std::string format = "json";

  auto* run_cmd = app.add_subcommand("run", "run a single simulation");
  run_flags.attach(run_cmd);
  run_cmd->add_option("--trace", trace_path, "replay a trace file instead of generating");
  run_cmd->add_option("--out", out_path, "write the report here instead of stdout");
  run_cmd->add_option("--format", format, "report format {csv, json}");
  run_cmd->add_option("--ledger", ledger_path, "also write the full ledger JSON here");

  std::string axis, values = "", policies = "all", seeds = "1";
  std::string sweep_out, sweep_format = "csv";
  auto* sweep_cmd = app.add_subcommand("sweep", "run one swept parameter axis");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "swept parameter")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values")->required();
  sweep_cmd->add_option("--policies", policies, "policies to run, or 'all'");
  sweep_cmd->add_option("--seeds", seeds, "comma-separated seeds");
  sweep_cmd->add_option("--out", sweep_out, "output path");
  sweep_cmd->add_option("--format", sweep_format, "output format {csv, json}");

  std::string verify_path;
  auto* verify_cmd = app.add_subcommand("verify", "verify a ledger's serializability");
  verify_cmd->add_option("ledger", verify_path, "ledger JSON file")->required();

  std::string gen_out = "trace.jsonl";
  auto* gen_cmd = app.add_subcommand("gen-trace", "generate a workload trace file");
  gen_flags.attach(gen_cmd);
  gen_cmd->add_option("--out", gen_out, "trace output path");

  auto* bench_cmd = app.add_subcommand("bench", "ordering-side microbenchmark");
  bench_flags.attach(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << '\n';
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, trace_path, out_path, format, ledger_path);
    if (*sweep_cmd)
      return cmd_sweep(sweep_flags, axis, values, policies, seeds, sweep_out, sweep_format);
    if (*verify_cmd) return cmd_verify(verify_path);
    if (*gen_cmd) return cmd_gen_trace(gen_flags, gen_out);
    if (*bench_cmd) return cmd_bench(bench_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (log_enabled()) std::cerr << "no subcommand executed\n";
  return 2;
}
