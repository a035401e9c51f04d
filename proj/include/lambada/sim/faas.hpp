#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lambada/sim/billing.hpp"
#include "lambada/sim/node.hpp"
#include "lambada/sim/object_store.hpp"
#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

struct FunctionSpec {
  std::string name = "worker";
  std::int64_t memory_mib = 1792;
  std::int64_t timeout_s = 900;
  double cold_start_penalty = 1.2;

  void validate() const;
};

/// Invocation calibration: latency of one call and the sustained rate at
/// which a driver or a worker can issue calls.
struct InvocationModel {
  Duration driver_latency = millis(36);
  double driver_rate_per_s = 250.0;
  Duration worker_latency = millis(36);
  double worker_rate_per_s = 80.0;

  void validate() const;
};

/// Measured per-region calibrations: "eu", "us", "sa", "ap".
InvocationModel region_preset(std::string_view region);
std::vector<std::string> region_names();

enum class OverLimit { kQueue, kReject };

struct FaasConfig {
  InvocationModel invocation;
  std::int64_t concurrency_limit = 1000;
  OverLimit over_limit = OverLimit::kQueue;
  std::size_t max_payload_bytes = 256 * 1024;
  Duration billing_granularity = millis(1);
  ShaperConfig worker_ingress;
  ShaperConfig worker_egress = ShaperConfig{}.without_burst();
  double memory_budget_fraction = 0.9;

  void validate() const;
};

/// Paces the calls of one issuing context: the k-th call of a burst is
/// initiated (k + 1) / rate after the burst began.
class Invoker {
 public:
  Invoker(std::string name, double rate_per_s, Duration latency)
      : name_(std::move(name)), rate_(rate_per_s), latency_(latency) {}

  const std::string& name() const noexcept { return name_; }
  Duration latency() const noexcept { return latency_; }
  double rate() const noexcept { return rate_; }
  SimTime next_initiation(SimTime now);

 private:
  std::string name_;
  double rate_;
  Duration latency_;
  SimTime anchor_{};
  SimTime last_{};
  std::int64_t count_ = 0;
};

struct InvocationRecord {
  std::uint64_t id = 0;
  std::string function;
  std::string issuer;
  SimTime requested_at{};
  SimTime initiated_at{};
  Duration call_latency{0};
  SimTime started_at{};
  SimTime finished_at{};
  bool cold = false;
  bool queued = false;
  bool timed_out = false;
  Duration billed{0};
  std::string error;
  JoinHandle done;
};

class FaasService;

/// What a handler sees while running inside a worker.
class WorkerContext {
 public:
  WorkerContext(FaasService& faas, InvocationRecord& record, Node& node, const Bytes& payload, Invoker& invoker)
      : faas_(faas), record_(record), node_(node), payload_(payload), invoker_(invoker) {}

  FaasService& faas() noexcept { return faas_; }
  Node& node() noexcept { return node_; }
  const Bytes& payload() const noexcept { return payload_; }
  Invoker& invoker() noexcept { return invoker_; }
  const InvocationRecord& record() const noexcept { return record_; }

 private:
  FaasService& faas_;
  InvocationRecord& record_;
  Node& node_;
  const Bytes& payload_;
  Invoker& invoker_;
};

using Handler = std::function<Task<void>(WorkerContext&)>;

/// Simulated function service: invocation pacing and latency, warm/cold
/// containers, a concurrency limit, and per-duration billing.
class FaasService {
 public:
  FaasService(Simulator& sim, BillingLedger& ledger, FaasConfig config = {});
  FaasService(const FaasService&) = delete;
  FaasService& operator=(const FaasService&) = delete;

  const FaasConfig& config() const noexcept { return config_; }
  Simulator& sim() noexcept { return sim_; }

  /// Registers or replaces a function. Replacing starts a new version whose containers are cold.
  void register_function(FunctionSpec spec, Handler handler);
  const FunctionSpec& function(const std::string& name) const;
  /// Marks `count` containers of `function` warm.
  void prewarm(const std::string& function, std::int64_t count);

  Invoker driver_invoker() const;
  Invoker worker_invoker(const std::string& name) const;

  /// Issues an invocation and returns once it has been initiated. The worker
  /// starts one invocation latency later (longer when its container is cold).
  Task<std::uint64_t> invoke(Invoker& from, std::string function, Bytes payload);

  const InvocationRecord& record(std::uint64_t id) const { return records_.at(id); }
  const std::deque<InvocationRecord>& records() const noexcept { return records_; }
  /// Waits until invocation `id` has finished.
  Task<void> wait(std::uint64_t id);

  std::int64_t active() const noexcept { return active_; }
  std::int64_t peak_active() const noexcept { return peak_active_; }

 private:
  struct Function {
    FunctionSpec spec;
    Handler handler;
    std::int64_t warm = 0;
  };
  struct Pending {
    std::uint64_t id;
    Bytes payload;
  };

  Function& fn(const std::string& name);
  void start(std::uint64_t id, Bytes payload, SimTime at);
  Task<void> run(std::uint64_t id, Bytes payload, SimTime at);
  void finish(std::uint64_t id);

  Simulator& sim_;
  BillingLedger& ledger_;
  FaasConfig config_;
  std::map<std::string, Function> functions_;
  std::deque<InvocationRecord> records_;
  std::deque<Pending> queue_;
  std::int64_t active_ = 0;
  std::int64_t peak_active_ = 0;
};

}  // namespace lambada::sim
