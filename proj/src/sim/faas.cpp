#include "lambada/sim/faas.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

void FunctionSpec::validate() const {
  if (memory_mib < 128 || memory_mib > 3008)
    throw Error(ErrorKind::kConfigError, fmt::format("memory_mib {} outside [128, 3008]", memory_mib));
  if (timeout_s < 1) throw Error(ErrorKind::kConfigError, "timeout must be at least 1 s");
  if (cold_start_penalty < 1.0) throw Error(ErrorKind::kConfigError, "cold start penalty must be >= 1");
}

void InvocationModel::validate() const {
  if (driver_rate_per_s <= 0 || worker_rate_per_s <= 0)
    throw Error(ErrorKind::kConfigError, "invocation rates must be positive");
  if (driver_latency.count() < 0 || worker_latency.count() < 0)
    throw Error(ErrorKind::kConfigError, "invocation latency must be non-negative");
}

InvocationModel region_preset(std::string_view region) {
  struct Row {
    std::string_view name;
    std::int64_t latency_ms;
    double driver_rate;
    double worker_rate;
  };
  static constexpr Row kRows[] = {
      {"eu", 36, 294, 81},
      {"us", 363, 276, 79},
      {"sa", 474, 243, 84},
      {"ap", 536, 222, 81},
  };
  for (const auto& r : kRows) {
    if (r.name == region) {
      InvocationModel m;
      m.driver_latency = millis(r.latency_ms);
      m.driver_rate_per_s = r.driver_rate;
      m.worker_rate_per_s = r.worker_rate;
      // intra-region call latency is not region dependent; keep the default
      return m;
    }
  }
  throw Error(ErrorKind::kConfigError, fmt::format("unknown region '{}'", region));
}

std::vector<std::string> region_names() { return {"eu", "us", "sa", "ap"}; }

void FaasConfig::validate() const {
  invocation.validate();
  if (concurrency_limit < 1) throw Error(ErrorKind::kConfigError, "concurrency limit must be positive");
  if (billing_granularity.count() < 1) throw Error(ErrorKind::kConfigError, "billing granularity must be positive");
  if (memory_budget_fraction <= 0 || memory_budget_fraction > 1)
    throw Error(ErrorKind::kConfigError, "memory budget fraction must be in (0, 1]");
  worker_ingress.validate();
  worker_egress.validate();
}

SimTime Invoker::next_initiation(SimTime now) {
  if (count_ == 0 || now > last_) {
    anchor_ = now;
    count_ = 0;
  }
  ++count_;
  last_ = anchor_ + from_seconds(static_cast<double>(count_) / rate_);
  return last_;
}

FaasService::FaasService(Simulator& sim, BillingLedger& ledger, FaasConfig config)
    : sim_(sim), ledger_(ledger), config_(std::move(config)) {
  config_.validate();
}

void FaasService::register_function(FunctionSpec spec, Handler handler) {
  spec.validate();
  if (!handler) throw Error(ErrorKind::kInvalidArgument, "handler must be callable");
  std::string name = spec.name;
  functions_[name] = Function{std::move(spec), std::move(handler), 0};
}

FaasService::Function& FaasService::fn(const std::string& name) {
  auto it = functions_.find(name);
  if (it == functions_.end()) throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown function '{}'", name));
  return it->second;
}

const FunctionSpec& FaasService::function(const std::string& name) const {
  auto it = functions_.find(name);
  if (it == functions_.end()) throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown function '{}'", name));
  return it->second.spec;
}

void FaasService::prewarm(const std::string& function, std::int64_t count) { fn(function).warm += count; }

Invoker FaasService::driver_invoker() const {
  return Invoker("driver", config_.invocation.driver_rate_per_s, config_.invocation.driver_latency);
}

Invoker FaasService::worker_invoker(const std::string& name) const {
  return Invoker(name, config_.invocation.worker_rate_per_s, config_.invocation.worker_latency);
}

Task<std::uint64_t> FaasService::invoke(Invoker& from, std::string function, Bytes payload) {
  (void)fn(function);
  if (payload.size() > config_.max_payload_bytes) {
    throw Error(ErrorKind::kPayloadTooLarge,
                fmt::format("payload of {} bytes exceeds {}", payload.size(), config_.max_payload_bytes));
  }
  const std::uint64_t id = records_.size();
  InvocationRecord& rec = records_.emplace_back();
  rec.id = id;
  rec.function = function;
  rec.issuer = from.name();
  rec.requested_at = sim_.now();
  rec.done = std::make_shared<JoinState>(sim_);
  rec.initiated_at = from.next_initiation(sim_.now());
  rec.call_latency = from.latency();
  co_await sim_.sleep_until(rec.initiated_at);

  if (active_ >= config_.concurrency_limit) {
    if (config_.over_limit == OverLimit::kReject) {
      rec.error = "rejected: concurrency limit";
      rec.finished_at = sim_.now();
      rec.done->done.set();
      throw Error(ErrorKind::kConcurrencyLimitExceeded,
                  fmt::format("{} concurrent executions", config_.concurrency_limit));
    }
    rec.queued = true;
    queue_.push_back(Pending{id, std::move(payload)});
    co_return id;
  }
  ++active_;
  peak_active_ = std::max(peak_active_, active_);
  start(id, std::move(payload), sim_.now() + rec.call_latency);
  co_return id;
}

void FaasService::start(std::uint64_t id, Bytes payload, SimTime at) {
  InvocationRecord& rec = records_[id];
  Function& f = fn(rec.function);
  rec.cold = f.warm == 0;
  if (!rec.cold) --f.warm;
  if (rec.cold) {
    // the extra start-up time scales the call latency as well as the run
    const auto base = at - sim_.now();
    at = sim_.now() + from_seconds(to_seconds(base) * f.spec.cold_start_penalty);
  }
  sim_.spawn(run(id, std::move(payload), at));
}

Task<void> FaasService::run(std::uint64_t id, Bytes payload, SimTime at) {
  co_await sim_.sleep_until(at);
  InvocationRecord& rec = records_[id];
  rec.started_at = sim_.now();
  Function& f = fn(rec.function);
  const Handler handler = f.handler;
  Node node(sim_, fmt::format("{}#{}", rec.function, id), config_.worker_ingress, config_.worker_egress,
            f.spec.memory_mib, config_.memory_budget_fraction);
  node.set_slowdown(rec.cold ? f.spec.cold_start_penalty : 1.0);
  Invoker invoker = worker_invoker(node.name());
  WorkerContext ctx(*this, rec, node, payload, invoker);
  try {
    co_await handler(ctx);
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  finish(id);
}

void FaasService::finish(std::uint64_t id) {
  InvocationRecord& rec = records_[id];
  Function& f = fn(rec.function);
  rec.finished_at = sim_.now();
  const std::int64_t g = config_.billing_granularity.count();
  std::int64_t run_us = (rec.finished_at - rec.started_at).count();
  const std::int64_t limit_us = f.spec.timeout_s * 1'000'000;
  if (run_us > limit_us) {
    rec.timed_out = true;
    run_us = limit_us;
  }
  const std::int64_t units = std::max<std::int64_t>(1, (run_us + g - 1) / g);
  rec.billed = Duration{units * g};
  ledger_.charge_worker(f.spec.memory_mib, rec.billed);
  ++f.warm;
  --active_;
  rec.done->done.set();

  while (!queue_.empty() && active_ < config_.concurrency_limit) {
    Pending p = std::move(queue_.front());
    queue_.pop_front();
    ++active_;
    peak_active_ = std::max(peak_active_, active_);
    // a queued call goes out once capacity frees up
    start(p.id, std::move(p.payload), sim_.now() + records_[p.id].call_latency);
  }
}

Task<void> FaasService::wait(std::uint64_t id) { co_await records_.at(id).done->done.wait(); }

}  // namespace lambada::sim
