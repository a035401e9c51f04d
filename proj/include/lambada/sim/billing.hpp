#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "lambada/sim/money.hpp"
#include "lambada/sim/time.hpp"

namespace lambada::sim {

/// Usage-based prices. Defaults follow us-east-1 S3 request pricing and
/// $3.3e-5 per second for a 2 GiB worker.
struct PriceSheet {
  Usd read_per_million = Usd::parse("0.4");
  Usd write_per_million = Usd::parse("5");
  Usd list_per_million = Usd::parse("5");
  Usd worker_per_gib_second = Usd::parse("0.0000165");

  Usd per_read() const { return read_per_million.divide_exact(1'000'000); }
  Usd per_write() const { return write_per_million.divide_exact(1'000'000); }
  Usd per_list() const { return list_per_million.divide_exact(1'000'000); }
  /// Price of one MiB-microsecond of worker time.
  Usd per_mib_microsecond() const { return worker_per_gib_second.divide_exact(Usd::Rep{1024} * 1'000'000); }
  /// Worker price per second for a function of `memory_mib`.
  Usd worker_per_second(std::int64_t memory_mib) const { return per_mib_microsecond() * (memory_mib * 1'000'000); }

  /// Throws Error(kConfigError) on negative prices or unit conversions that are not exact.
  void validate() const;
};

struct BucketCounters {
  std::uint64_t reads = 0;            // successful GETs, including empty ranges
  std::uint64_t reads_not_found = 0;  // billed 404s
  std::uint64_t writes = 0;
  std::uint64_t lists = 0;
  std::uint64_t throttled = 0;        // rejected attempts; not billed
};

struct WorkerCounters {
  std::uint64_t invocations = 0;
  std::int64_t billed_us = 0;
};

/// Aggregate request/worker counts; subtract two snapshots for a delta.
struct UsageTotals {
  std::uint64_t reads = 0;
  std::uint64_t reads_not_found = 0;
  std::uint64_t writes = 0;
  std::uint64_t lists = 0;
  std::uint64_t throttled = 0;
  std::int64_t worker_mib_us = 0;
  Usd request_usd;
  Usd worker_usd;

  Usd total_usd() const { return request_usd + worker_usd; }
  UsageTotals operator-(const UsageTotals& o) const;
};

/// Per-category billing counters plus a running dollar total.
///
/// Every charge is an exact integer addition, so total() always equals
/// recompute(), which rebuilds the amount from the counters alone.
class BillingLedger {
 public:
  explicit BillingLedger(PriceSheet prices = {});

  const PriceSheet& prices() const noexcept { return prices_; }

  void charge_read(const std::string& bucket, bool found);
  void charge_write(const std::string& bucket);
  void charge_list(const std::string& bucket);
  void note_throttle(const std::string& bucket);
  void charge_worker(std::int64_t memory_mib, Duration billed);

  Usd total() const noexcept { return total_; }
  Usd recompute() const;

  UsageTotals totals() const;
  const std::map<std::string, BucketCounters>& buckets() const noexcept { return buckets_; }
  const std::map<std::int64_t, WorkerCounters>& workers() const noexcept { return workers_; }

  /// category,bucket,count,unit_price,usd
  std::string to_csv() const;

 private:
  PriceSheet prices_;
  Usd per_read_, per_write_, per_list_, per_mib_us_;
  std::map<std::string, BucketCounters> buckets_;
  std::map<std::int64_t, WorkerCounters> workers_;
  Usd total_;
};

}  // namespace lambada::sim
