#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lambada/exchange/naming.hpp"
#include "lambada/sim/billing.hpp"

namespace lambada::exchange {

struct ExchangeVariant {
  int levels = 1;
  WriteCombining write_combining = WriteCombining::kOff;

  /// "1l", "2l-wc" (offsets in the name), "3l-wcf" (offsets file).
  std::string name() const;
  /// Throws Error(kConfigError).
  static ExchangeVariant parse(std::string_view text);
  /// The six variants of the request cost table, in table order.
  static std::vector<ExchangeVariant> table();
};

struct CostModelRow {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t lists = 0;
  int scans = 0;
  sim::Usd request_usd;
};

/// Request counts of an exchange among `workers` workers. Each of the k levels
/// has every role read one object (or part) from each member of its group and
/// write one object per member, or a single combined file. An offsets file
/// adds one write per sender and one read per part; offsets in the name add
/// one list per receiver. On perfect powers this is k·P·P^(1/k) reads.
CostModelRow exchange_cost(std::uint64_t workers, ExchangeVariant variant, const sim::PriceSheet& prices,
                           std::uint64_t side = 0);

/// Seconds one worker spends moving `bytes_per_worker` in and out `scans`
/// times at `mib_per_s`, ignoring waits.
double exchange_worker_seconds(double bytes_per_worker, int scans, double mib_per_s);
/// Worker cost of exchanging `total_bytes` across `workers` workers.
double exchange_worker_usd(double total_bytes, std::uint64_t workers, int scans, double mib_per_s,
                           double usd_per_second);

/// Requests per bucket in one round: P workers spreading s requests each over B buckets.
double per_bucket_rate(std::uint64_t workers, std::uint64_t side, std::uint32_t buckets);

}  // namespace lambada::exchange
