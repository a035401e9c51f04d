#pragma once

#include <cstdint>
#include <string>

#include "lambada/sim/bandwidth.hpp"
#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

/// Relative compute throughput of a function with `memory_mib` running
/// `threads` busy threads; 1.0 equals one vCPU (reached at 1792 MiB).
double cpu_throughput(std::int64_t memory_mib, int threads);

/// Execution context of one simulated process (a worker or the driver):
/// network links, a FIFO CPU and a memory budget.
class Node {
 public:
  Node(Simulator& sim, std::string name, const ShaperConfig& ingress, const ShaperConfig& egress,
       std::int64_t memory_mib, double memory_budget_fraction = 0.9);
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  Simulator& sim() noexcept { return sim_; }
  const std::string& name() const noexcept { return name_; }
  LinkShaper& ingress() noexcept { return ingress_; }
  LinkShaper& egress() noexcept { return egress_; }
  std::int64_t memory_mib() const noexcept { return memory_mib_; }

  double cpu_throughput(int threads) const { return sim::cpu_throughput(memory_mib_, threads); }

  /// Multiplier on every compute duration; cold containers run at 1.2.
  void set_slowdown(double factor) { slowdown_ = factor; }
  double slowdown() const noexcept { return slowdown_; }

  /// Occupies the CPU for `vcpu_seconds` of single-vCPU work scaled by the
  /// throughput available to `threads` threads. Requests are served FIFO.
  Task<void> compute(double vcpu_seconds, int threads = 1);
  Duration cpu_busy() const noexcept { return cpu_busy_; }

  /// Memory accounting; allocate throws Error(kOutOfMemory) past the budget.
  void allocate(std::uint64_t bytes);
  void release(std::uint64_t bytes) noexcept;
  std::uint64_t memory_budget() const noexcept { return budget_; }
  std::uint64_t memory_in_use() const noexcept { return in_use_; }
  std::uint64_t memory_peak() const noexcept { return peak_; }

 private:
  Simulator& sim_;
  std::string name_;
  LinkShaper ingress_;
  LinkShaper egress_;
  std::int64_t memory_mib_;
  double slowdown_ = 1.0;
  Semaphore cpu_;
  Duration cpu_busy_{0};
  std::uint64_t budget_;
  std::uint64_t in_use_ = 0;
  std::uint64_t peak_ = 0;
};

}  // namespace lambada::sim
