#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambada/exchange/cost_model.hpp"
#include "lambada/exchange/grid.hpp"
#include "lambada/exchange/naming.hpp"
#include "lambada/exchange/records.hpp"
#include "lambada/sim/cloud.hpp"

namespace lambada::exchange {

struct ExchangeConfig {
  int levels = 1;
  WriteCombining write_combining = WriteCombining::kOff;
  std::uint64_t side = 0;  // 0 picks ceil(P^(1/levels))
  NamingScheme naming;
  /// Logical bytes per stored byte of every exchange object.
  std::uint32_t scale = 1;
  /// Concurrent requests per worker.
  int connections = 8;
  double partition_ns_per_byte = 0.5;
  /// Receivers retry a missing object every poll_interval, poll_attempts times in all.
  sim::Duration poll_interval = sim::millis(50);
  int poll_attempts = 600;

  ExchangeVariant variant() const { return {levels, write_combining}; }
  /// Throws Error(kInvalidArgument).
  void validate() const;
};

struct ExchangeEnv {
  sim::ObjectStore& store;
  sim::Node& node;
};

/// Time one worker spent in each phase of one level. Receives run on several
/// connections at once; wait is the longest any connection spent on missing
/// objects and incomplete listings, read is the rest of the receive phase.
struct PhaseTrace {
  std::uint64_t worker = 0;
  int level = 0;
  sim::Duration partition{0};
  sim::Duration write{0};
  sim::Duration wait{0};
  sim::Duration read{0};
  std::uint64_t bytes_sent = 0;  // logical
  std::uint64_t bytes_received = 0;
  std::uint64_t records_sent = 0;
  std::uint64_t records_received = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

struct ExchangeOutput {
  std::vector<Record> records;
  std::vector<PhaseTrace> trace;  // one per level
};

/// Creates the buckets of `naming` that do not exist yet.
void create_buckets(sim::ObjectStore& store, const NamingScheme& naming);

/// Runs worker `worker`'s side of an exchange among `workers` workers. Each
/// level exchanges data within the worker's group along one grid dimension:
/// every role partitions its records by that digit of the owner, writes the
/// parts, then reads what its group wrote for it. After the last level each
/// worker holds exactly the records it owns. Empty parts are written too.
sim::Task<ExchangeOutput> run_exchange(ExchangeEnv env, std::uint64_t worker, std::uint64_t workers,
                                       ExchangeConfig config, std::vector<Record> input, Partitioner partitioner);
inline sim::Task<ExchangeOutput> run_exchange(ExchangeEnv env, std::uint64_t worker, std::uint64_t workers,
                                              ExchangeConfig config, std::vector<Record> input) {
  return run_exchange(env, worker, workers, std::move(config), std::move(input), hash_key);
}

struct ExchangeJob {
  std::uint64_t workers = 1;
  ExchangeConfig config;
  Partitioner partitioner = hash_key;
  std::int64_t memory_mib = 2048;
  /// When set, worker w first downloads its input from {input_bucket}/{input_prefix}{w}.
  std::optional<std::string> input_bucket;
  std::string input_prefix = "input/";
  /// Per-worker start times; empty starts everyone at once.
  std::vector<sim::Duration> start_at;
};

struct WorkerTimes {
  std::uint64_t worker = 0;
  sim::Duration start{0};
  sim::Duration input{0};
  sim::Duration finish{0};
};

struct ExchangeJobResult {
  std::vector<std::vector<Record>> outputs;
  std::vector<PhaseTrace> trace;
  std::vector<WorkerTimes> workers;
  sim::Duration makespan{0};
  sim::UsageTotals usage;

  std::string trace_csv() const;
  /// worker,start_s,input_s,finish_s
  std::string workers_csv() const;
};

/// Runs a whole exchange on `cloud`, one node per worker, driving the event
/// loop to completion. `inputs` is ignored when the job reads its input from
/// the store. Worker time is billed to the cloud's ledger.
ExchangeJobResult simulate_exchange(sim::Cloud& cloud, const ExchangeJob& job,
                                    std::vector<std::vector<Record>> inputs);

}  // namespace lambada::exchange
