#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lambada/engine/aggregate.hpp"
#include "lambada/engine/plan.hpp"
#include "lambada/invoke/invocation.hpp"
#include "lambada/scan/planner.hpp"
#include "lambada/sim/cloud.hpp"

namespace lambada::engine {

struct ExecOptions {
  /// F: files per worker; W = ceil(files / F) workers.
  std::uint64_t files_per_worker = 1;
  invoke::Strategy strategy = invoke::Strategy::kTwoLevel;
  scan::ScanConfig scan;
  /// Straggler budget: the driver gives up when no result arrives for this long.
  sim::Duration result_timeout = std::chrono::seconds(900);
  std::string spill_bucket = "lambada-results";
};

struct WorkerPhase {
  std::uint64_t worker = 0;
  int generation = 1;
  bool cold = false;
  bool ok = true;
  sim::Duration initiated{0};   // relative to the query start
  sim::Duration started{0};     // function start
  sim::Duration body_start{0};  // fragment start, after children were invoked
  sim::Duration posted{0};      // result handed to the queue
  sim::Duration received{0};    // result seen by the driver
  sim::Duration scan{0};
  sim::Duration exchange{0};
  std::uint64_t rows_scanned = 0;
  std::uint64_t bytes = 0;
};

struct QueryReport {
  std::uint64_t query = 0;
  std::uint64_t workers = 0;
  std::uint64_t files = 0;
  std::int64_t memory_mib = 0;
  sim::Duration latency{0};         // end to end, as seen by the driver
  sim::Duration last_initiated{0};  // invocation phase
  sim::Duration last_posted{0};     // slowest worker done
  sim::Duration last_received{0};   // driver heard back from all workers
  sim::Duration collect{0};         // fetching spilled results and merging
  std::uint64_t rows_scanned = 0;
  std::uint64_t bytes = 0;
  std::uint64_t spilled = 0;
  sim::UsageTotals usage;
  std::vector<WorkerPhase> per_worker;

  sim::Usd request_usd() const { return usage.request_usd; }
  sim::Usd worker_usd() const { return usage.worker_usd; }
  sim::Usd total_usd() const { return usage.total_usd(); }

  static std::string csv_header();
  std::string csv_row() const;
  std::string workers_csv() const;
  Json to_json() const;
};

struct QueryOutcome {
  QueryResult result;
  QueryReport report;
};

/// Driver: registers the worker function once, so later queries find warm
/// containers, and runs plans on the cloud's function service.
class Engine {
 public:
  Engine(sim::Cloud& cloud, sim::FunctionSpec spec);
  explicit Engine(sim::Cloud& cloud) : Engine(cloud, sim::FunctionSpec{}) {}
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const sim::FunctionSpec& function() const noexcept { return spec_; }

  /// Invokes the workers, collects one result per worker from the result
  /// queue and merges them. Throws Error(kWorkerError) naming the lowest failed
  /// worker, Error(kTimeout) when the straggler budget runs out, or
  /// Error(kInvalidArgument) for plans without files.
  sim::Task<QueryOutcome> run(LogicalPlan plan, ExecOptions options);
  /// As run, driving the event loop until it drains.
  QueryOutcome execute(const LogicalPlan& plan, const ExecOptions& options);

 private:
  sim::Cloud& cloud_;
  sim::FunctionSpec spec_;
  invoke::Launcher launcher_;
  std::uint64_t next_query_ = 0;
};

}  // namespace lambada::engine
