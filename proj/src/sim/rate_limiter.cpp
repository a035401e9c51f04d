#include "lambada/sim/rate_limiter.hpp"

#include <algorithm>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

RateLimiter::RateLimiter(std::int64_t limit_per_second) : limit_(limit_per_second) {
  if (limit_ < 1) throw Error(ErrorKind::kConfigError, "rate limit must be at least 1 request/s");
}

bool RateLimiter::try_admit(SimTime now) {
  const SimTime horizon = now - std::chrono::seconds(1);
  while (!window_.empty() && window_.front() <= horizon) window_.pop_front();
  if (static_cast<std::int64_t>(window_.size()) >= limit_) {
    ++rejected_;
    return false;
  }
  window_.push_back(now);
  ++admitted_;
  peak_ = std::max(peak_, static_cast<std::int64_t>(window_.size()));
  return true;
}

}  // namespace lambada::sim
