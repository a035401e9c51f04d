#include "lambada/sim/billing.hpp"

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

void PriceSheet::validate() const {
  for (const Usd& p : {read_per_million, write_per_million, list_per_million, worker_per_gib_second}) {
    if (p < Usd{}) throw Error(ErrorKind::kConfigError, "prices must be non-negative");
  }
  (void)per_read();
  (void)per_write();
  (void)per_list();
  (void)per_mib_microsecond();
}

UsageTotals UsageTotals::operator-(const UsageTotals& o) const {
  UsageTotals d;
  d.reads = reads - o.reads;
  d.reads_not_found = reads_not_found - o.reads_not_found;
  d.writes = writes - o.writes;
  d.lists = lists - o.lists;
  d.throttled = throttled - o.throttled;
  d.worker_mib_us = worker_mib_us - o.worker_mib_us;
  d.request_usd = request_usd - o.request_usd;
  d.worker_usd = worker_usd - o.worker_usd;
  return d;
}

BillingLedger::BillingLedger(PriceSheet prices) : prices_(prices) {
  prices_.validate();
  per_read_ = prices_.per_read();
  per_write_ = prices_.per_write();
  per_list_ = prices_.per_list();
  per_mib_us_ = prices_.per_mib_microsecond();
}

void BillingLedger::charge_read(const std::string& bucket, bool found) {
  auto& c = buckets_[bucket];
  found ? ++c.reads : ++c.reads_not_found;
  total_ += per_read_;
}

void BillingLedger::charge_write(const std::string& bucket) {
  ++buckets_[bucket].writes;
  total_ += per_write_;
}

void BillingLedger::charge_list(const std::string& bucket) {
  ++buckets_[bucket].lists;
  total_ += per_list_;
}

void BillingLedger::note_throttle(const std::string& bucket) { ++buckets_[bucket].throttled; }

void BillingLedger::charge_worker(std::int64_t memory_mib, Duration billed) {
  auto& w = workers_[memory_mib];
  ++w.invocations;
  w.billed_us += billed.count();
  total_ += per_mib_us_ * (memory_mib * billed.count());
}

Usd BillingLedger::recompute() const {
  const UsageTotals t = totals();
  return t.request_usd + t.worker_usd;
}

UsageTotals BillingLedger::totals() const {
  UsageTotals t;
  for (const auto& [name, c] : buckets_) {
    t.reads += c.reads;
    t.reads_not_found += c.reads_not_found;
    t.writes += c.writes;
    t.lists += c.lists;
    t.throttled += c.throttled;
  }
  t.request_usd = per_read_ * static_cast<Usd::Rep>(t.reads + t.reads_not_found) +
                  per_write_ * static_cast<Usd::Rep>(t.writes) + per_list_ * static_cast<Usd::Rep>(t.lists);
  for (const auto& [mem, w] : workers_) {
    t.worker_mib_us += mem * w.billed_us;
  }
  t.worker_usd = per_mib_us_ * static_cast<Usd::Rep>(t.worker_mib_us);
  return t;
}

std::string BillingLedger::to_csv() const {
  std::string out = "category,bucket,count,unit_price,usd\n";
  auto row = [&out](std::string_view cat, std::string_view bucket, std::uint64_t count, Usd unit) {
    out += fmt::format("{},{},{},{},{}\n", cat, bucket, count, unit.to_plain_string(),
                       (unit * static_cast<Usd::Rep>(count)).to_plain_string());
  };
  for (const auto& [name, c] : buckets_) {
    row("read", name, c.reads + c.reads_not_found, per_read_);
    row("write", name, c.writes, per_write_);
    row("list", name, c.lists, per_list_);
  }
  for (const auto& [mem, w] : workers_) {
    row("worker_us", fmt::format("fn-{}MiB", mem), static_cast<std::uint64_t>(w.billed_us), per_mib_us_ * mem);
  }
  return out;
}

}  // namespace lambada::sim
