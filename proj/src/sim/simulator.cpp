#include "lambada/sim/simulator.hpp"

#include <cassert>

namespace lambada::sim {

void Signal::set() {
  if (set_) return;
  set_ = true;
  auto waiters = std::move(waiters_);
  waiters_.clear();
  for (auto h : waiters) sim_->schedule_resume(sim_->now(), h);
}

void Semaphore::release() {
  if (!waiters_.empty()) {
    auto h = waiters_.front();
    waiters_.pop();
    sim_->schedule_resume(sim_->now(), h);
  } else {
    ++permits_;
  }
}

void Simulator::schedule_at(SimTime t, std::function<void()> action) {
  assert(t >= now_);
  events_.push(Event{t, seq_++, std::move(action)});
}

void Simulator::schedule_resume(SimTime t, std::coroutine_handle<> h) {
  schedule_at(t, [h] { h.resume(); });
}

namespace {

// Root coroutine that owns a spawned task and destroys itself when done.
struct Detached {
  struct promise_type {
    Detached get_return_object() { return Detached{std::coroutine_handle<promise_type>::from_promise(*this)}; }
    std::suspend_always initial_suspend() noexcept { return {}; }
    std::suspend_never final_suspend() noexcept { return {}; }
    void return_void() noexcept {}
    void unhandled_exception() noexcept { std::terminate(); }
  };
  std::coroutine_handle<promise_type> handle;
};

Detached run_detached(Task<void> task, JoinHandle state) {
  try {
    co_await task;
  } catch (...) {
    state->error = std::current_exception();
  }
  state->done.set();
}

}  // namespace

JoinHandle Simulator::spawn(Task<void> task) {
  auto state = std::make_shared<JoinState>(*this);
  auto root = run_detached(std::move(task), state);
  schedule_resume(now_, root.handle);
  return state;
}

Task<void> Simulator::join(JoinHandle handle) {
  co_await handle->done.wait();
  if (handle->error) std::rethrow_exception(handle->error);
}

Task<void> Simulator::when_all(std::vector<Task<void>> tasks) {
  std::vector<JoinHandle> handles;
  handles.reserve(tasks.size());
  for (auto& t : tasks) handles.push_back(spawn(std::move(t)));
  std::exception_ptr first;
  for (auto& h : handles) {
    co_await h->done.wait();
    if (h->error && !first) first = h->error;
  }
  if (first) std::rethrow_exception(first);
}

void Simulator::run() {
  while (!events_.empty()) {
    // pop before running: the action may schedule new events
    Event ev = std::move(const_cast<Event&>(events_.top()));
    events_.pop();
    now_ = ev.time;
    ++processed_;
    ev.action();
  }
}

void Simulator::trace(std::string line) {
  if (tracing_) trace_.push_back(std::to_string(now_.time_since_epoch().count()) + " " + std::move(line));
}

}  // namespace lambada::sim
