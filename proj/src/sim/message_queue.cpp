#include "lambada/sim/message_queue.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

Task<void> MessageQueue::send(Bytes body) {
  if (body.size() > config_.max_message_bytes) {
    throw Error(ErrorKind::kPayloadTooLarge,
                fmt::format("message of {} bytes exceeds {}", body.size(), config_.max_message_bytes));
  }
  co_await sim_.sleep_for(config_.send_latency);
  messages_.push_back(QueuedMessage{std::move(body), sim_.now()});
  ++sent_;
  auto waiters = std::move(waiters_);
  waiters_.clear();
  for (auto& w : waiters) w->set();
}

Task<std::vector<QueuedMessage>> MessageQueue::take(Duration timeout, std::size_t max) {
  const SimTime deadline = sim_.now() + timeout;
  while (true) {
    if (!messages_.empty()) {
      ++polls_;
      co_await sim_.sleep_for(config_.poll_latency);
      std::vector<QueuedMessage> out;
      while (!messages_.empty() && out.size() < max) {
        out.push_back(std::move(messages_.front()));
        messages_.pop_front();
      }
      // another poller may have drained the queue during our latency
      if (!out.empty()) co_return out;
      continue;
    }
    if (sim_.now() >= deadline) {
      ++polls_;
      throw Error(ErrorKind::kTimeout, fmt::format("queue {}: no message within {} us", name_, timeout.count()));
    }
    auto signal = std::make_shared<Signal>(sim_);
    waiters_.push_back(signal);
    sim_.schedule_at(deadline, [signal] { signal->set(); });
    co_await signal->wait();
  }
}

Task<QueuedMessage> MessageQueue::poll(Duration timeout) {
  auto batch = co_await take(timeout, 1);
  co_return std::move(batch.front());
}

Task<std::vector<QueuedMessage>> MessageQueue::poll_batch(Duration timeout) {
  co_return co_await take(timeout, config_.max_batch);
}

MessageQueue& QueueService::create(const std::string& name) {
  auto& slot = queues_[name];
  if (!slot) slot = std::make_unique<MessageQueue>(sim_, name, config_);
  return *slot;
}

MessageQueue& QueueService::get(const std::string& name) {
  auto it = queues_.find(name);
  if (it == queues_.end()) throw Error(ErrorKind::kInvalidArgument, fmt::format("no queue named '{}'", name));
  return *it->second;
}

}  // namespace lambada::sim
