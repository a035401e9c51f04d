#include "lambada/sim/node.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

double cpu_throughput(std::int64_t memory_mib, int threads) {
  if (threads < 1) throw Error(ErrorKind::kInvalidArgument, "threads must be at least 1");
  return std::min(static_cast<double>(threads), static_cast<double>(memory_mib) / 1792.0);
}

Node::Node(Simulator& sim, std::string name, const ShaperConfig& ingress, const ShaperConfig& egress,
           std::int64_t memory_mib, double memory_budget_fraction)
    : sim_(sim),
      name_(std::move(name)),
      ingress_(sim, ingress),
      egress_(sim, egress),
      memory_mib_(memory_mib),
      cpu_(sim, 1),
      budget_(static_cast<std::uint64_t>(static_cast<double>(memory_mib) * memory_budget_fraction * kMiB)) {
  if (memory_mib < 1) throw Error(ErrorKind::kConfigError, "memory must be positive");
}

Task<void> Node::compute(double vcpu_seconds, int threads) {
  if (vcpu_seconds <= 0) co_return;
  const Duration d = from_seconds(vcpu_seconds * slowdown_ / cpu_throughput(threads));
  co_await cpu_.acquire();
  co_await sim_.sleep_for(d);
  cpu_busy_ += d;
  cpu_.release();
}

void Node::allocate(std::uint64_t bytes) {
  if (in_use_ + bytes > budget_) {
    throw Error(ErrorKind::kOutOfMemory,
                fmt::format("{}: allocation of {} bytes exceeds budget ({} of {} in use)", name_, bytes, in_use_,
                            budget_));
  }
  in_use_ += bytes;
  peak_ = std::max(peak_, in_use_);
}

void Node::release(std::uint64_t bytes) noexcept { in_use_ -= std::min(bytes, in_use_); }

}  // namespace lambada::sim
