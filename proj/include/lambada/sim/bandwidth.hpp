#pragma once

#include <coroutine>
#include <cstdint>
#include <vector>

#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

inline constexpr double kMiB = 1024.0 * 1024.0;

/// How concurrent transfers split the link.
/// kFifo: in arrival order, each transfer takes up to the per-connection rate
/// from what is left of the cap, so requests pipeline behind each other.
/// kFair: every transfer gets min(per_connection, cap / n).
enum class SharePolicy { kFifo, kFair };

/// Network model of one worker direction (ingress or egress).
///
/// The aggregate rate is capped by the burst cap while burst credits remain
/// and by the steady rate otherwise. Credits drain at (aggregate - steady) and
/// refill at (steady - aggregate) up to the maximum. A single connection never
/// exceeds per_connection, so bursting requires several connections.
struct ShaperConfig {
  double steady_mib_per_s = 90.0;
  double burst_cap_mib_per_s = 300.0;
  double burst_credit_mib = (300.0 - 90.0) * 3.0;
  double per_connection_mib_per_s = 90.0;
  Duration first_byte_latency = millis(20);
  /// Each request's first-byte latency is drawn uniformly from
  /// latency * [1 - jitter, 1 + jitter] by a per-link deterministic sequence.
  double latency_jitter = 0.0;
  SharePolicy policy = SharePolicy::kFifo;

  void validate() const;
  /// Same limits without bursting.
  ShaperConfig without_burst() const {
    ShaperConfig c = *this;
    c.burst_credit_mib = 0;
    return c;
  }
};

class LinkShaper {
 public:
  LinkShaper(Simulator& sim, ShaperConfig config);
  LinkShaper(const LinkShaper&) = delete;
  LinkShaper& operator=(const LinkShaper&) = delete;

  const ShaperConfig& config() const noexcept { return config_; }

  /// Completes when `bytes` have crossed the link (the data phase of one request).
  auto transfer(std::uint64_t bytes) {
    struct Awaiter {
      LinkShaper& link;
      std::uint64_t bytes;
      bool await_ready() const noexcept { return bytes == 0; }
      void await_suspend(std::coroutine_handle<> h) { link.add_flow(static_cast<double>(bytes), h); }
      void await_resume() const noexcept {}
    };
    return Awaiter{*this, bytes};
  }

  /// First-byte latency of the next request on this link.
  Duration next_latency();

  std::uint64_t bytes_transferred() const noexcept { return bytes_total_; }
  /// Remaining burst credit as of the last state change.
  double credit_mib() const noexcept { return credit_bytes_ / kMiB; }
  std::size_t active_flows() const noexcept { return flows_.size(); }

 private:
  struct Flow {
    double remaining;
    std::coroutine_handle<> waiter;
    double rate = 0;  // bytes/s
  };

  void add_flow(double bytes, std::coroutine_handle<> waiter);
  void advance();
  void reschedule();
  void on_tick(std::uint64_t generation);

  Simulator& sim_;
  ShaperConfig config_;
  double credit_bytes_;
  SimTime last_update_;
  std::uint64_t generation_ = 0;
  std::uint64_t bytes_total_ = 0;
  std::uint64_t requests_ = 0;
  std::vector<Flow> flows_;
};

}  // namespace lambada::sim
