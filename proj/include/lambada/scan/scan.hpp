#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lambada/lcf/format.hpp"
#include "lambada/scan/planner.hpp"
#include "lambada/scan/predicate.hpp"
#include "lambada/sim/billing.hpp"
#include "lambada/sim/node.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::scan {

/// Where a scan runs: the store it reads, the machine it runs on, and the
/// prices used to cost it.
struct ScanEnv {
  sim::ObjectStore& store;
  sim::Node& node;
  const sim::PriceSheet& prices;
};

/// Qualifying rows of one row group, restricted to the projection.
struct ScanBatch {
  std::size_t file = 0;
  std::size_t group = 0;
  lcf::Table table;
};

using BatchSink = std::function<sim::Task<void>(ScanBatch)>;

/// Sink that appends every batch to `out`.
BatchSink collect_into(std::vector<ScanBatch>& out);

struct ScanReport {
  std::size_t files = 0;
  std::size_t row_groups = 0;
  std::size_t row_groups_scanned = 0;
  std::uint64_t rows_scanned = 0;
  std::uint64_t rows_emitted = 0;
  std::uint64_t requests = 0;
  std::uint64_t footer_requests = 0;
  std::uint64_t bytes = 0;  // logical bytes received
  sim::Duration duration{0};
  sim::Usd request_usd;
  sim::Usd worker_usd;

  static std::string csv_header();
  std::string csv_row() const;
};

/// Schema of the emitted batches.
lcf::Schema output_schema(const lcf::Schema& file_schema, const PredicateSet& preds);

/// Scans LCF objects `keys` of `bucket`: prunes row groups by statistics,
/// downloads the projected and predicated column chunks per plan_downloads,
/// applies the predicates row by row and emits one batch per scanned group,
/// in file and group order. All files must share one schema.
sim::Task<ScanReport> execute_scan(ScanEnv env, std::string bucket, std::vector<std::string> keys, PredicateSet preds,
                                   ScanConfig config, BatchSink sink);

/// Last plan built by execute_scan for each file, for debugging.
struct PlanLog {
  std::vector<std::string> keys;
  std::vector<DownloadPlan> plans;
};
sim::Task<ScanReport> execute_scan(ScanEnv env, std::string bucket, std::vector<std::string> keys, PredicateSet preds,
                                   ScanConfig config, BatchSink sink, PlanLog* log);

struct DownloadReport {
  std::uint64_t bytes = 0;  // logical
  std::uint64_t requests = 0;
  sim::Duration duration{0};
  sim::Usd request_usd;

  double mib_per_s() const;
};

/// Downloads a whole object with ranged GETs of `chunk_size` logical bytes
/// over `connections` concurrent connections.
sim::Task<DownloadReport> download_object(ScanEnv env, std::string bucket, std::string key, std::uint64_t chunk_size,
                                          int connections);

}  // namespace lambada::scan
