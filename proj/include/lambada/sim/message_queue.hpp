#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lambada/sim/object_store.hpp"
#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

struct QueueConfig {
  Duration send_latency = millis(10);
  Duration poll_latency = millis(10);
  std::size_t max_batch = 10;
  std::size_t max_message_bytes = 256 * 1024;
};

struct QueuedMessage {
  Bytes body;
  SimTime enqueued_at{};
};

/// FIFO queue. A poll blocks in virtual time until a message is visible or
/// its timeout passes.
class MessageQueue {
 public:
  MessageQueue(Simulator& sim, std::string name, QueueConfig config) : sim_(sim), name_(std::move(name)), config_(config) {}

  const std::string& name() const noexcept { return name_; }

  Task<void> send(Bytes body);
  /// One message; throws Error(kTimeout) once `timeout` has passed without one.
  Task<QueuedMessage> poll(Duration timeout);
  /// Up to max_batch messages (at least one).
  Task<std::vector<QueuedMessage>> poll_batch(Duration timeout);

  std::size_t depth() const noexcept { return messages_.size(); }
  std::uint64_t sent() const noexcept { return sent_; }
  std::uint64_t polls() const noexcept { return polls_; }

 private:
  Task<std::vector<QueuedMessage>> take(Duration timeout, std::size_t max);

  Simulator& sim_;
  std::string name_;
  QueueConfig config_;
  std::deque<QueuedMessage> messages_;
  std::vector<std::shared_ptr<Signal>> waiters_;
  std::uint64_t sent_ = 0;
  std::uint64_t polls_ = 0;
};

class QueueService {
 public:
  QueueService(Simulator& sim, QueueConfig config = {}) : sim_(sim), config_(config) {}

  MessageQueue& create(const std::string& name);
  MessageQueue& get(const std::string& name);
  const QueueConfig& config() const noexcept { return config_; }

 private:
  Simulator& sim_;
  QueueConfig config_;
  std::map<std::string, std::unique_ptr<MessageQueue>> queues_;
};

}  // namespace lambada::sim
