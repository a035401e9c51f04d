#pragma once

#include <cstdint>
#include <deque>

#include "lambada/sim/time.hpp"

namespace lambada::sim {

enum class ThrottleBehavior { kRetry, kReject };

/// Sliding one-second window admission control. Admits a request at time t
/// iff fewer than `limit` requests were admitted in (t - 1 s, t].
class RateLimiter {
 public:
  explicit RateLimiter(std::int64_t limit_per_second);

  bool try_admit(SimTime now);

  std::int64_t limit() const noexcept { return limit_; }
  std::uint64_t admitted() const noexcept { return admitted_; }
  std::uint64_t rejected() const noexcept { return rejected_; }
  /// Largest number of admissions observed inside any one-second window.
  std::int64_t peak_per_second() const noexcept { return peak_; }

 private:
  std::int64_t limit_;
  std::deque<SimTime> window_;
  std::uint64_t admitted_ = 0;
  std::uint64_t rejected_ = 0;
  std::int64_t peak_ = 0;
};

}  // namespace lambada::sim
