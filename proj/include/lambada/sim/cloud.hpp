#pragma once

#include "lambada/sim/billing.hpp"
#include "lambada/sim/config.hpp"
#include "lambada/sim/faas.hpp"
#include "lambada/sim/message_queue.hpp"
#include "lambada/sim/node.hpp"
#include "lambada/sim/object_store.hpp"
#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

/// One simulated cloud account: event loop, billing, storage, functions,
/// queues and the driver machine.
class Cloud {
 public:
  explicit Cloud(const CloudConfig& config = {})
      : config_(config),
        ledger_(config.prices),
        store_(sim_, ledger_, config.store),
        faas_(sim_, ledger_, config.faas),
        queues_(sim_, config.queue),
        driver_(sim_, "driver", config.driver_network, config.driver_network, config.driver_memory_mib, 1.0) {}
  Cloud(const Cloud&) = delete;
  Cloud& operator=(const Cloud&) = delete;

  const CloudConfig& config() const noexcept { return config_; }
  Simulator& sim() noexcept { return sim_; }
  BillingLedger& ledger() noexcept { return ledger_; }
  ObjectStore& store() noexcept { return store_; }
  FaasService& faas() noexcept { return faas_; }
  QueueService& queues() noexcept { return queues_; }
  Node& driver() noexcept { return driver_; }

 private:
  CloudConfig config_;
  Simulator sim_;
  BillingLedger ledger_;
  ObjectStore store_;
  FaasService faas_;
  QueueService queues_;
  Node driver_;
};

}  // namespace lambada::sim
