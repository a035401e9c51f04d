#include "lambada/bench/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::bench {
namespace {

double s(sim::Duration d) { return sim::to_seconds(d); }

template <typename T>
T drive(sim::Simulator& sim, sim::Task<T> task) {
  T out{};
  auto body = [](sim::Task<T> t, T& out) -> sim::Task<void> { out = co_await std::move(t); };
  auto handle = sim.spawn(body(std::move(task), out));
  sim.run();
  if (handle->error) std::rethrow_exception(handle->error);
  return out;
}

sim::Usd billed_since(sim::Cloud& cloud, std::size_t first, std::int64_t memory_mib) {
  const auto& records = cloud.faas().records();
  const sim::Usd per = cloud.ledger().prices().per_mib_microsecond();
  sim::Usd total;
  for (std::size_t i = first; i < records.size(); ++i) total += per * (memory_mib * records[i].billed.count());
  return total;
}

}  // namespace

GenSpec preset(std::string_view name) {
  GenSpec spec;
  if (name == "desk") return spec;
  if (name == "paper") {
    spec.files = 320;
    spec.rows_per_file = 4096;
    spec.groups_per_file = 16;
    spec.object_scale = 5000;
    return spec;
  }
  throw Error(ErrorKind::kConfigError, fmt::format("unknown dataset preset '{}' (desk|paper)", name));
}

std::string QuerySweep::csv() const {
  std::string out = "workload,run,files_per_worker," + engine::QueryReport::csv_header() +
                    ",invocations_usd,reconciled,oracle_match\n";
  for (const auto& r : runs) {
    out += fmt::format("{},{},{},{},{},{},{}\n", query_name(r.query), r.hot ? "hot" : "cold", r.files_per_worker,
                       r.report.csv_row(), r.invocations_usd.to_plain_string(), r.reconciled() ? "yes" : "no",
                       r.matches_oracle ? (*r.matches_oracle ? "yes" : "no") : "-");
  }
  return out;
}

QuerySweep run_query_sweep(const QuerySweepConfig& config) {
  const auto files = lineitem_files(config.data, config.seed);
  std::optional<engine::QueryResult> expected;
  QuerySweep sweep;
  for (const std::uint64_t F : config.files_per_worker) {
    if (F < 1) throw Error(ErrorKind::kConfigError, "files per worker must be positive");
    for (const std::int64_t M : config.memories) {
      sim::Cloud cloud(config.cloud);
      const Dataset data = install(cloud.store(), config.data, files);
      if (config.check_oracle && !expected) expected = oracle(config.query, read_dataset(cloud.store(), data));
      sim::FunctionSpec spec;
      spec.memory_mib = M;
      engine::Engine engine(cloud, spec);
      const auto plan = query_plan(config.query, data);
      engine::ExecOptions options;
      options.files_per_worker = F;
      options.strategy = config.strategy;
      options.scan = config.scan;
      for (const bool hot : {false, true}) {
        const std::size_t first = cloud.faas().records().size();
        auto outcome = engine.execute(plan, options);
        QueryRun run;
        run.query = config.query;
        run.memory_mib = M;
        run.files_per_worker = F;
        run.hot = hot;
        run.invocations_usd = billed_since(cloud, first, M);
        if (expected) run.matches_oracle = outcome.result == *expected;
        run.report = std::move(outcome.report);
        run.result = std::move(outcome.result);
        sweep.runs.push_back(std::move(run));
      }
    }
  }
  return sweep;
}

std::optional<double> exchange_reference_s(std::uint64_t workers) {
  switch (workers) {
    case 250: return 22.0;
    case 500: return 15.0;
    case 1000: return 13.0;
    default: return std::nullopt;
  }
}

std::string ExchangeBench::csv() const {
  std::string out =
      "workers,variant,buckets,data_bytes,scale,invoke_s,makespan_s,reference_s,ratio,reads,writes,lists,throttled,"
      "request_usd,worker_usd,total_usd,ownership_ok\n";
  for (const auto& r : runs) {
    const double makespan = s(r.result.makespan);
    const auto& u = r.result.usage;
    out += fmt::format("{},{},{},{:.0f},{},{:.6f},{:.6f},{},{},{},{},{},{},{},{},{},{}\n", r.workers, variant, buckets,
                       data_bytes, r.scale, s(r.last_started), makespan,
                       r.reference_s ? fmt::format("{:.1f}", *r.reference_s) : "",
                       r.reference_s ? fmt::format("{:.4f}", makespan / *r.reference_s) : "", u.reads, u.writes,
                       u.lists, u.throttled, u.request_usd.to_plain_string(), u.worker_usd.to_plain_string(),
                       u.total_usd().to_plain_string(), r.ownership_ok ? "yes" : "no");
  }
  return out;
}

ExchangeBench run_exchange_bench(const ExchangeBenchConfig& config) {
  const auto variant = exchange::ExchangeVariant::parse(config.variant);
  if (config.records_per_worker < 1) throw Error(ErrorKind::kConfigError, "records_per_worker must be positive");
  if (config.data_bytes <= 0) throw Error(ErrorKind::kConfigError, "exchange data size must be positive");
  ExchangeBench bench{variant.name(), config.buckets, config.data_bytes, {}};
  const double record_bytes = 12.0 + config.value_bytes;
  for (const std::uint64_t W : config.workers) {
    if (W < 1) throw Error(ErrorKind::kConfigError, "exchange needs at least one worker");
    const double stored = record_bytes * static_cast<double>(config.records_per_worker);
    const auto scale = static_cast<std::uint32_t>(std::max(1.0, std::floor(config.data_bytes / W / stored)));

    exchange::ExchangeJob job;
    job.workers = W;
    job.config.levels = variant.levels;
    job.config.write_combining = variant.write_combining;
    job.config.naming.buckets = config.buckets;
    job.config.scale = scale;
    job.memory_mib = config.memory_mib;
    job.input_bucket = "exchange-input";

    ExchangeRun run;
    run.workers = W;
    run.scale = scale;
    run.reference_s = exchange_reference_s(W);
    if (config.include_invocation) {
      sim::Cloud launch(config.cloud);
      sim::FunctionSpec spec;
      spec.memory_mib = config.memory_mib;
      auto plan = invoke::build_plan(W, invoke::Strategy::kTwoLevel);
      const auto report = drive(launch.sim(), invoke::run_plan(launch.faas(), std::move(plan), spec));
      for (const auto& w : report.workers) job.start_at.push_back(w.started);
      run.last_started = report.last_started;
    }

    sim::Cloud cloud(config.cloud);
    cloud.store().create_bucket(*job.input_bucket);
    std::mt19937_64 rng(config.seed * 1'000'003 + W);
    for (std::uint64_t w = 0; w < W; ++w) {
      std::vector<exchange::Record> records(config.records_per_worker);
      for (auto& r : records) {
        r.key = rng();
        r.value.assign(config.value_bytes, static_cast<char>('a' + r.key % 26));
      }
      cloud.store().seed(*job.input_bucket, job.input_prefix + std::to_string(w), exchange::encode(records), scale);
    }
    run.result = exchange::simulate_exchange(cloud, job, {});

    std::uint64_t total = 0;
    run.ownership_ok = true;
    for (std::uint64_t w = 0; w < W; ++w) {
      total += run.result.outputs[w].size();
      for (const auto& r : run.result.outputs[w]) run.ownership_ok &= exchange::owner(job.partitioner, r.key, W) == w;
    }
    run.ownership_ok &= total == W * config.records_per_worker;
    bench.runs.push_back(std::move(run));
  }
  return bench;
}

std::string InvokeBench::summary_csv() const {
  std::string out = "strategy,workers,first_gen,last_initiated_s,predicted_s,last_started_s\n";
  for (const auto& r : runs) {
    const auto first_gen = std::count_if(r.report.workers.begin(), r.report.workers.end(),
                                         [](const invoke::WorkerLaunch& w) { return w.generation == 1; });
    out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f}\n", invoke::strategy_name(r.strategy), workers, first_gen,
                       s(r.report.last_initiated), s(r.predicted), s(r.report.last_started));
  }
  return out;
}

std::string InvokeBench::phases_csv() const {
  if (runs.empty()) return "worker,driver_delay_s,invocation_latency_s,second_gen_s\n";
  return runs.front().report.phases_csv();
}

InvokeBench run_invoke_bench(const InvokeBenchConfig& config) {
  InvokeBench bench;
  bench.workers = config.workers;
  for (const auto strategy : config.strategies) {
    sim::Cloud cloud(config.cloud);
    InvokeRun run;
    run.strategy = strategy;
    auto plan = invoke::build_plan(config.workers, strategy);
    run.predicted = invoke::predict_last_initiation(plan, cloud.config().faas.invocation);
    run.report = drive(cloud.sim(), invoke::run_plan(cloud.faas(), std::move(plan), config.function));
    bench.runs.push_back(std::move(run));
  }
  return bench;
}

sim::CloudConfig invoke_calibration() {
  sim::CloudConfig c;
  c.faas.invocation.driver_rate_per_s = 250;
  c.faas.invocation.worker_rate_per_s = 80;
  c.faas.invocation.driver_latency = sim::millis(100);
  c.faas.invocation.worker_latency = sim::millis(100);
  c.faas.concurrency_limit = 10'000;
  return c;
}

std::string ScanSweep::csv() const {
  std::string out = "chunk_mib,connections,mib_per_s,requests,duration_s,request_usd\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{:.3f},{},{:.6f},{}\n", r.chunk_mib, r.connections, r.report.mib_per_s(),
                       r.report.requests, s(r.report.duration), r.report.request_usd.to_plain_string());
  }
  return out;
}

ScanSweep run_scan_sweep(const ScanSweepConfig& config) {
  constexpr std::uint64_t kStored = 1 << 20;
  if (config.object_bytes < kStored || config.object_bytes % kStored)
    throw Error(ErrorKind::kConfigError, "scan-sweep object size must be a positive multiple of 1 MiB");
  ScanSweep sweep;
  for (const std::uint64_t chunk : config.chunk_mib) {
    for (const int connections : config.connections) {
      sim::Cloud cloud(config.cloud);
      cloud.store().create_bucket("scan-sweep");
      cloud.store().seed("scan-sweep", "object", sim::Bytes(kStored, 0x5a),
                         static_cast<std::uint32_t>(config.object_bytes / kStored));
      const auto& faas = cloud.config().faas;
      sim::Node node(cloud.sim(), "scan-sweep", faas.worker_ingress, faas.worker_egress, config.memory_mib,
                     faas.memory_budget_fraction);
      scan::ScanEnv env{cloud.store(), node, cloud.ledger().prices()};
      auto report = drive(cloud.sim(), scan::download_object(env, "scan-sweep", "object", chunk << 20, connections));
      sweep.rows.push_back({chunk, connections, report});
    }
  }
  return sweep;
}

EconReport run_econ(const econ::Presets& presets) {
  return {econ::job_scoped_csv(presets), econ::always_on_csv(presets, {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}),
          econ::crossover_csv(presets)};
}

std::map<std::string, std::string> run_suite(const SuiteConfig& config) {
  std::map<std::string, std::string> out;
  for (const Query q : {Query::kQ1, Query::kQ6}) {
    QuerySweepConfig sweep;
    sweep.query = q;
    sweep.data = config.data;
    sweep.seed = config.seed;
    sweep.cloud = config.cloud;
    out[std::string(query_name(q)) + ".csv"] = run_query_sweep(sweep).csv();
  }
  ExchangeBenchConfig xchg;
  xchg.seed = config.seed;
  xchg.cloud = config.cloud;
  const auto exchange = run_exchange_bench(xchg);
  out["exchange.csv"] = exchange.csv();
  for (const auto& r : exchange.runs) {
    out[fmt::format("exchange-w{}-workers.csv", r.workers)] = r.result.workers_csv();
  }
  const auto invoke = run_invoke_bench({});
  out["invoke.csv"] = invoke.summary_csv();
  out["invoke-phases.csv"] = invoke.phases_csv();
  ScanSweepConfig scan;
  scan.cloud = config.cloud;
  out["scan-sweep.csv"] = run_scan_sweep(scan).csv();
  const auto econ = run_econ(config.econ);
  out["econ-job-scoped.csv"] = econ.job_scoped;
  out["econ-always-on.csv"] = econ.always_on;
  out["econ-crossover.csv"] = econ.crossover;
  return out;
}

}  // namespace lambada::bench
