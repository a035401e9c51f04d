#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lambada/sim/billing.hpp"
#include "lambada/sim/faas.hpp"
#include "lambada/sim/message_queue.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::sim {

struct CloudConfig {
  PriceSheet prices;
  StoreConfig store;
  FaasConfig faas;
  QueueConfig queue;
  ShaperConfig driver_network;
  std::int64_t driver_memory_mib = 16384;

  void validate() const;
};

/// Request limits of the older per-prefix regime: 800 reads/s, 300 writes/s.
StoreConfig historic_limits(StoreConfig base = {});

/// Reads an INI file. Sections [prices], [store], [network], [faas], [queue]
/// and [driver] are interpreted; other sections are left to their owners.
/// Unknown keys inside interpreted sections are errors.
CloudConfig load_cloud_config(const std::string& path);
CloudConfig parse_cloud_config(const std::string& ini_text);

/// Explicit path if given, else $LAMBADA_LAB_CONFIG, else none.
std::optional<std::string> resolve_config_path(const std::optional<std::string>& flag);

}  // namespace lambada::sim
