#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lambada/sim/faas.hpp"

namespace lambada::invoke {

enum class Strategy { kDirect, kTwoLevel };

std::string_view strategy_name(Strategy s);
/// "direct" or "two-level"; throws Error(kConfigError).
Strategy parse_strategy(std::string_view text);

struct WorkerCall {
  std::uint64_t id = 0;
  sim::Bytes payload;
};

/// A first-generation worker and the workers it starts before running its own fragment.
struct Assignment {
  WorkerCall self;
  std::vector<WorkerCall> children;
};

struct InvocationPlan {
  Strategy strategy = Strategy::kDirect;
  std::uint64_t workers = 0;
  std::vector<Assignment> first_gen;  // in driver issue order
};

using PayloadFactory = std::function<sim::Bytes(std::uint64_t worker)>;

/// Direct: the driver starts every worker. Two-level: the driver starts
/// g = ceil(sqrt(P)) workers (ids 0..g-1) and the remaining ids are split in
/// contiguous runs of ceil or floor((P - g) / g), larger runs first. P = 1 is
/// always direct. `first_gen` overrides g.
InvocationPlan build_plan(std::uint64_t workers, Strategy strategy, const PayloadFactory& payloads = {},
                          std::uint64_t first_gen = 0);

/// Time at which the last worker is initiated if every call goes out at the
/// modeled rates and first-generation workers start after one call latency.
sim::Duration predict_last_initiation(const InvocationPlan& plan, const sim::InvocationModel& model);

struct WorkerLaunch {
  std::uint64_t worker = 0;
  int generation = 1;
  std::optional<std::uint64_t> parent;
  std::uint64_t invocation = 0;  // FaaS record id
  sim::Duration initiated{0};   // relative to the launch
  sim::Duration started{0};
  sim::Duration children_done{0};  // last child initiated, for first-generation workers with children
  bool cold = false;
};

struct InvocationReport {
  std::vector<WorkerLaunch> workers;  // by worker id
  sim::Duration last_initiated{0};
  sim::Duration last_started{0};

  /// One row per worker.
  std::string workers_csv() const;
  /// Per first-generation worker: driver delay, invocation latency and
  /// time spent starting its children.
  std::string phases_csv() const;
};

/// Worker code run by a launched function after its children were started.
using WorkerBody = std::function<sim::Task<void>(sim::WorkerContext& ctx, std::uint64_t worker, const sim::Bytes& payload)>;

/// Starts the workers of a plan through a function service and tracks which
/// invocation carries which worker id.
class Launcher {
 public:
  Launcher(sim::FaasService& faas, std::string function);
  Launcher(const Launcher&) = delete;
  Launcher& operator=(const Launcher&) = delete;

  /// Registers the function under `spec.name` (which must equal the launcher's function name).
  void register_function(sim::FunctionSpec spec, WorkerBody body);

  /// Issues the driver's calls; returns once the last of them is initiated.
  /// Throws Error(kPayloadTooLarge) or Error(kConcurrencyLimitExceeded).
  sim::Task<void> launch(InvocationPlan plan);
  /// Waits until every worker of the plan has finished.
  sim::Task<void> wait_all();

  /// Valid once wait_all returned.
  InvocationReport report() const;
  /// Errors raised by worker bodies or while starting children, by worker id.
  std::vector<std::pair<std::uint64_t, std::string>> failures() const;

 private:
  sim::Task<void> handle(sim::WorkerContext& ctx, WorkerBody body);

  sim::FaasService& faas_;
  std::string function_;
  std::uint64_t workers_ = 0;
  sim::SimTime origin_{};
  std::vector<std::optional<std::uint64_t>> invocation_of_;
  std::vector<std::optional<std::uint64_t>> parent_of_;
  std::vector<sim::SimTime> children_done_;
  std::vector<std::uint64_t> issued_;
};

/// Launches `plan` with a no-op body, waits for every worker and reports.
sim::Task<InvocationReport> run_plan(sim::FaasService& faas, InvocationPlan plan, sim::FunctionSpec spec);
inline sim::Task<InvocationReport> run_plan(sim::FaasService& faas, InvocationPlan plan) {
  return run_plan(faas, std::move(plan), sim::FunctionSpec{});
}

}  // namespace lambada::invoke
