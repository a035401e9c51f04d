#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace lambada::sim {

using Duration = std::chrono::microseconds;

/// Clock tag for virtual time. Never read directly; Simulator::now() is the only source.
struct VirtualClock {
  using rep = Duration::rep;
  using period = Duration::period;
  using duration = Duration;
  using time_point = std::chrono::time_point<VirtualClock, Duration>;
  static constexpr bool is_steady = true;
};

using SimTime = VirtualClock::time_point;

inline constexpr SimTime kEpoch{};

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-6; }
inline double to_seconds(SimTime t) { return to_seconds(t.time_since_epoch()); }

/// Rounds up to the next microsecond so that modeled work never takes zero time by truncation.
inline Duration from_seconds(double s) { return Duration{static_cast<Duration::rep>(std::ceil(s * 1e6 - 1e-6))}; }

inline constexpr Duration millis(std::int64_t ms) { return std::chrono::milliseconds(ms); }

}  // namespace lambada::sim
