#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "lambada/sim/task.hpp"
#include "lambada/sim/time.hpp"

namespace lambada::sim {

class Simulator;

/// One-shot broadcast flag in virtual time. Waiters resume at the instant
/// set() is called, in the order they started waiting.
class Signal {
 public:
  explicit Signal(Simulator& sim) : sim_(&sim) {}

  bool is_set() const noexcept { return set_; }
  void set();

  auto wait() {
    struct Awaiter {
      Signal& s;
      bool await_ready() const noexcept { return s.set_; }
      void await_suspend(std::coroutine_handle<> h) { s.waiters_.push_back(h); }
      void await_resume() const noexcept {}
    };
    return Awaiter{*this};
  }

 private:
  Simulator* sim_;
  bool set_ = false;
  std::vector<std::coroutine_handle<>> waiters_;
};

/// Completion state of a spawned task.
struct JoinState {
  explicit JoinState(Simulator& sim) : done(sim) {}
  Signal done;
  std::exception_ptr error;
};
using JoinHandle = std::shared_ptr<JoinState>;

/// Counting semaphore in virtual time; FIFO wake-up order.
class Semaphore {
 public:
  Semaphore(Simulator& sim, std::int64_t permits) : sim_(&sim), permits_(permits) {}

  auto acquire() {
    struct Awaiter {
      Semaphore& s;
      bool await_ready() noexcept {
        if (s.permits_ > 0 && s.waiters_.empty()) {
          --s.permits_;
          return true;
        }
        return false;
      }
      void await_suspend(std::coroutine_handle<> h) { s.waiters_.push(h); }
      void await_resume() const noexcept {}
    };
    return Awaiter{*this};
  }
  void release();
  std::int64_t available() const noexcept { return permits_; }

 private:
  Simulator* sim_;
  std::int64_t permits_;
  std::queue<std::coroutine_handle<>> waiters_;
};

/// Deterministic discrete-event loop owning virtual time.
///
/// Events scheduled for the same instant fire in scheduling order. All
/// simulated components run as coroutines resumed from run(); nothing here is
/// thread-safe and nothing needs to be.
class Simulator {
 public:
  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimTime now() const noexcept { return now_; }

  void schedule_at(SimTime t, std::function<void()> action);
  void schedule_resume(SimTime t, std::coroutine_handle<> h);

  auto sleep_until(SimTime t) {
    struct Awaiter {
      Simulator& sim;
      SimTime t;
      bool await_ready() const noexcept { return false; }
      void await_suspend(std::coroutine_handle<> h) { sim.schedule_resume(t < sim.now() ? sim.now() : t, h); }
      void await_resume() const noexcept {}
    };
    return Awaiter{*this, t};
  }
  auto sleep_for(Duration d) { return sleep_until(now_ + d); }

  /// Starts `task` as an independent root at the current instant.
  JoinHandle spawn(Task<void> task);

  /// Awaits a spawned task and rethrows its exception, if any.
  static Task<void> join(JoinHandle handle);

  /// Runs all tasks concurrently; rethrows the first failure after all finished.
  Task<void> when_all(std::vector<Task<void>> tasks);

  /// Runs until no events remain.
  void run();

  std::uint64_t events_processed() const noexcept { return processed_; }

  /// Optional event trace used for determinism checks.
  void enable_trace(bool on) { tracing_ = on; }
  bool tracing() const noexcept { return tracing_; }
  void trace(std::string line);
  const std::vector<std::string>& trace_lines() const noexcept { return trace_; }

 private:
  struct Event {
    SimTime time;
    std::uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  SimTime now_{};
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  bool tracing_ = false;
  std::vector<std::string> trace_;
};

}  // namespace lambada::sim
