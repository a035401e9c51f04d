#include "lambada/sim/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

namespace {
constexpr double kDoneEpsilon = 1e-3;    // bytes
constexpr double kCreditEpsilon = 1e-3;  // bytes
}  // namespace

void ShaperConfig::validate() const {
  if (steady_mib_per_s <= 0 || per_connection_mib_per_s <= 0)
    throw Error(ErrorKind::kConfigError, "bandwidth limits must be positive");
  if (burst_cap_mib_per_s < steady_mib_per_s)
    throw Error(ErrorKind::kConfigError, "burst cap must not be below the steady rate");
  if (burst_credit_mib < 0) throw Error(ErrorKind::kConfigError, "burst credit must be non-negative");
  if (latency_jitter < 0 || latency_jitter >= 1) throw Error(ErrorKind::kConfigError, "latency jitter must be in [0, 1)");
  if (first_byte_latency.count() < 0) throw Error(ErrorKind::kConfigError, "latency must be non-negative");
}

LinkShaper::LinkShaper(Simulator& sim, ShaperConfig config)
    : sim_(sim), config_(config), credit_bytes_(config.burst_credit_mib * kMiB), last_update_(sim.now()) {
  config_.validate();
}

Duration LinkShaper::next_latency() {
  const std::uint64_t n = requests_++;
  if (config_.latency_jitter == 0) return config_.first_byte_latency;
  // splitmix64 of the request number; the same link always sees the same sequence
  std::uint64_t z = n + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
  const double scale = 1.0 + config_.latency_jitter * (2.0 * u - 1.0);
  return Duration{static_cast<Duration::rep>(std::llround(config_.first_byte_latency.count() * scale))};
}

void LinkShaper::add_flow(double bytes, std::coroutine_handle<> waiter) {
  advance();
  flows_.push_back(Flow{bytes, waiter});
  bytes_total_ += static_cast<std::uint64_t>(bytes);
  reschedule();
}

void LinkShaper::advance() {
  const SimTime now = sim_.now();
  const double dt = to_seconds(now - last_update_);
  last_update_ = now;
  if (dt <= 0) return;
  const double steady = config_.steady_mib_per_s * kMiB;
  double aggregate = 0;
  for (auto& f : flows_) {
    f.remaining -= f.rate * dt;
    aggregate += f.rate;
  }
  credit_bytes_ += (steady - aggregate) * dt;
  credit_bytes_ = std::clamp(credit_bytes_, 0.0, config_.burst_credit_mib * kMiB);
}

void LinkShaper::reschedule() {
  // finish flows that are done; resume them through the event queue
  auto done = std::stable_partition(flows_.begin(), flows_.end(),
                                    [](const Flow& f) { return f.remaining > kDoneEpsilon; });
  for (auto it = done; it != flows_.end(); ++it) sim_.schedule_resume(sim_.now(), it->waiter);
  flows_.erase(done, flows_.end());

  ++generation_;
  if (flows_.empty()) return;
  const double steady = config_.steady_mib_per_s * kMiB;
  const bool bursting = credit_bytes_ > kCreditEpsilon;
  const double cap = (bursting ? config_.burst_cap_mib_per_s : config_.steady_mib_per_s) * kMiB;
  const double per_conn = config_.per_connection_mib_per_s * kMiB;
  double left = cap;
  for (auto& f : flows_) {
    f.rate = config_.policy == SharePolicy::kFair ? std::min(per_conn, cap / static_cast<double>(flows_.size()))
                                                   : std::min(per_conn, left);
    left -= f.rate;
  }
  const double aggregate = cap - left;

  double next = std::numeric_limits<double>::infinity();
  for (const auto& f : flows_) {
    if (f.rate > 0) next = std::min(next, f.remaining / f.rate);
  }
  if (bursting && aggregate > steady) next = std::min(next, credit_bytes_ / (aggregate - steady));

  const std::uint64_t gen = generation_;
  sim_.schedule_at(sim_.now() + from_seconds(next), [this, gen] { on_tick(gen); });
}

void LinkShaper::on_tick(std::uint64_t generation) {
  if (generation != generation_) return;
  advance();
  reschedule();
}

}  // namespace lambada::sim
