#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lambada/bench/queries.hpp"
#include "lambada/econ/econ.hpp"
#include "lambada/engine/driver.hpp"
#include "lambada/exchange/exchange.hpp"
#include "lambada/invoke/invocation.hpp"
#include "lambada/scan/scan.hpp"
#include "lambada/sim/config.hpp"

namespace lambada::bench {

/// "desk": 256 MiB of logical data in 32 files. "paper": 320 files of about
/// 400 MiB each, stored as 4096 rows per file. Throws Error(kConfigError).
GenSpec preset(std::string_view name);

struct QuerySweepConfig {
  Query query = Query::kQ1;
  GenSpec data;
  std::uint64_t seed = 1;
  std::vector<std::int64_t> memories{512, 1024, 1792, 2048, 3008};
  std::vector<std::uint64_t> files_per_worker{4, 2, 1};
  invoke::Strategy strategy = invoke::Strategy::kTwoLevel;
  scan::ScanConfig scan;
  bool check_oracle = true;
  sim::CloudConfig cloud;
};

struct QueryRun {
  Query query = Query::kQ1;
  std::int64_t memory_mib = 0;
  std::uint64_t files_per_worker = 1;
  bool hot = false;
  engine::QueryReport report;
  /// Sum of the billed duration of every invocation of the run, priced one by one.
  sim::Usd invocations_usd;
  std::optional<bool> matches_oracle;
  engine::QueryResult result;

  bool reconciled() const { return invocations_usd == report.worker_usd(); }
};

struct QuerySweep {
  std::vector<QueryRun> runs;

  std::string csv() const;
};

/// For every (M, F) a fresh cloud and function run the query cold, then hot.
QuerySweep run_query_sweep(const QuerySweepConfig& config);

struct ExchangeBenchConfig {
  double data_bytes = 100e9;
  std::vector<std::uint64_t> workers{250, 500, 1000};
  std::string variant = "2l-wc";
  std::uint32_t buckets = 10;
  std::int64_t memory_mib = 2048;
  /// Stored records per worker; objects are scaled up to data_bytes.
  std::uint64_t records_per_worker = 1000;
  std::uint32_t value_bytes = 88;
  /// Start each worker when a two-level invocation would have started it.
  bool include_invocation = true;
  std::uint64_t seed = 1;
  sim::CloudConfig cloud;
};

struct ExchangeRun {
  std::uint64_t workers = 0;
  std::uint32_t scale = 1;
  sim::Duration last_started{0};
  exchange::ExchangeJobResult result;
  std::optional<double> reference_s;
  bool ownership_ok = false;
};

struct ExchangeBench {
  std::string variant;
  std::uint32_t buckets = 0;
  double data_bytes = 0;
  std::vector<ExchangeRun> runs;

  std::string csv() const;
};

/// Published running times of the S3-based exchange on 100 GB.
std::optional<double> exchange_reference_s(std::uint64_t workers);

ExchangeBench run_exchange_bench(const ExchangeBenchConfig& config);

/// Invocation calibration of the fan-out experiment: 250 calls/s from the
/// driver, 80 calls/s from a worker, 100 ms per call, no concurrency cap in reach.
sim::CloudConfig invoke_calibration();

struct InvokeBenchConfig {
  std::uint64_t workers = 4096;
  std::vector<invoke::Strategy> strategies{invoke::Strategy::kTwoLevel, invoke::Strategy::kDirect};
  sim::FunctionSpec function;
  sim::CloudConfig cloud = invoke_calibration();
};

struct InvokeRun {
  invoke::Strategy strategy = invoke::Strategy::kTwoLevel;
  invoke::InvocationReport report;
  sim::Duration predicted{0};
};

struct InvokeBench {
  std::uint64_t workers = 0;
  std::vector<InvokeRun> runs;

  /// strategy,workers,first_gen,last_initiated_s,predicted_s,last_started_s
  std::string summary_csv() const;
  /// Per first-generation worker of the first run: driver delay,
  /// invocation latency and time spent starting its children.
  std::string phases_csv() const;
};

InvokeBench run_invoke_bench(const InvokeBenchConfig& config);

struct ScanSweepConfig {
  std::uint64_t object_bytes = 1ULL << 30;
  std::vector<std::uint64_t> chunk_mib{1, 2, 4, 8, 16, 32};
  std::vector<int> connections{1, 2, 4, 8};
  std::int64_t memory_mib = 2048;
  sim::CloudConfig cloud;
};

struct ScanSweepRow {
  std::uint64_t chunk_mib = 0;
  int connections = 0;
  scan::DownloadReport report;
};

struct ScanSweep {
  std::vector<ScanSweepRow> rows;

  /// chunk_mib,connections,mib_per_s,requests,duration_s,request_usd
  std::string csv() const;
};

/// Downloads one object from a worker-sized node for every chunk size and connection count.
ScanSweep run_scan_sweep(const ScanSweepConfig& config);

struct EconReport {
  std::string job_scoped;
  std::string always_on;
  std::string crossover;
};

EconReport run_econ(const econ::Presets& presets);

struct SuiteConfig {
  GenSpec data = preset("desk");
  std::uint64_t seed = 1;
  sim::CloudConfig cloud;
  econ::Presets econ = econ::default_presets();
};

/// Every benchmark at its default parameters on `data`; CSV text by name.
std::map<std::string, std::string> run_suite(const SuiteConfig& config);

}  // namespace lambada::bench
