#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambada/engine/plan.hpp"
#include "lambada/scan/planner.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::engine {

/// What one worker runs: its slice of the input and the serverless operators.
struct PlanFragment {
  std::uint64_t query = 0;
  std::uint64_t worker = 0;
  std::uint64_t workers = 1;
  std::vector<std::string> files;
  Json pipeline;  // LogicalPlan::serverless_json
  std::string result_queue;
  std::string spill_bucket;
  scan::ScanConfig scan;

  sim::Bytes encode() const;
  /// Throws Error(kInvalidArgument).
  static PlanFragment decode(const sim::Bytes& payload);
  LogicalPlan plan() const { return LogicalPlan::from_serverless_json(pipeline, files); }
};

struct WorkerMetrics {
  std::uint64_t rows_scanned = 0;
  std::uint64_t rows_emitted = 0;
  std::uint64_t bytes = 0;
  sim::Duration scan{0};
  sim::Duration exchange{0};
  sim::Duration fragment{0};  // from handler start to the result being posted
  sim::Duration body_start{0};  // virtual time the handler started, since the epoch
};

/// The message a worker posts to the result queue.
struct WorkerResult {
  std::uint64_t query = 0;
  std::uint64_t worker = 0;
  bool ok = true;
  std::string error_kind;
  std::string message;
  /// Partial aggregate state or collected rows, inline or behind a pointer.
  std::optional<Json> payload;
  std::optional<std::string> spill_key;  // in the fragment's spill bucket
  WorkerMetrics metrics;

  sim::Bytes encode() const;
  /// Throws Error(kInvalidArgument).
  static WorkerResult decode(const sim::Bytes& body);
};

Json table_json(const lcf::Table& table);
lcf::Table table_from_json(const Json& j, const lcf::Schema& schema);

}  // namespace lambada::engine
