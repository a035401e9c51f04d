#include "lambada/sim/object_store.hpp"

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

void StoreConfig::validate() const {
  if (read_limit_per_s < 1 || write_limit_per_s < 1)
    throw Error(ErrorKind::kConfigError, "request limits must be at least 1/s");
  if (max_retries < 0) throw Error(ErrorKind::kConfigError, "max_retries must be non-negative");
  if (retry_delay.count() <= 0) throw Error(ErrorKind::kConfigError, "retry delay must be positive");
  if (max_keys_per_list < 1) throw Error(ErrorKind::kConfigError, "max_keys_per_list must be positive");
}

ObjectStore::ObjectStore(Simulator& sim, BillingLedger& ledger, StoreConfig config)
    : sim_(sim), ledger_(ledger), config_(config) {
  config_.validate();
}

void ObjectStore::create_bucket(const std::string& name) {
  if (name.empty()) throw Error(ErrorKind::kInvalidArgument, "bucket name must not be empty");
  buckets_.try_emplace(name, config_);
}

ObjectStore::Bucket& ObjectStore::bucket(const std::string& name) {
  auto it = buckets_.find(name);
  if (it == buckets_.end()) throw Error(ErrorKind::kNoSuchBucket, name);
  return it->second;
}

const ObjectStore::Bucket& ObjectStore::bucket(const std::string& name) const {
  auto it = buckets_.find(name);
  if (it == buckets_.end()) throw Error(ErrorKind::kNoSuchBucket, name);
  return it->second;
}

static void check_key(const std::string& key) {
  if (key.size() > kMaxKeyBytes)
    throw Error(ErrorKind::kKeyTooLong, fmt::format("key of {} bytes exceeds {}", key.size(), kMaxKeyBytes));
}

std::uint64_t Scale::logical(std::uint64_t size, std::uint64_t first, std::uint64_t count) const {
  const std::uint64_t boundary = size - std::min(unscaled_tail, size);
  const std::uint64_t end = first + count;
  const std::uint64_t scaled = first < boundary ? std::min(end, boundary) - first : 0;
  return scaled * factor + (count - scaled);
}

std::uint64_t Scale::stored_suffix(std::uint64_t size, std::uint64_t logical_len) const {
  const std::uint64_t tail = std::min(unscaled_tail, size);
  if (logical_len <= tail) return logical_len;
  return std::min(size, tail + (logical_len - tail) / factor);
}

void ObjectStore::seed(const std::string& bucket_name, const std::string& key, Bytes data, Scale scale) {
  check_key(key);
  if (scale.factor < 1) throw Error(ErrorKind::kInvalidArgument, "scale must be at least 1");
  auto& b = bucket(bucket_name);
  auto& slot = b.objects[key];
  if (slot.data) stored_bytes_ -= slot.data->size();
  stored_bytes_ += data.size();
  slot = Blob{std::make_shared<const Bytes>(std::move(data)), scale};
}

Task<int> ObjectStore::admit(std::string bucket_name, bool write) {
  int attempts = 0;
  while (true) {
    auto& b = bucket(bucket_name);
    RateLimiter& limiter = write ? b.writes : b.reads;
    if (limiter.try_admit(sim_.now())) co_return attempts;
    ++b.throttled;
    ledger_.note_throttle(bucket_name);
    ++attempts;
    if (config_.throttle == ThrottleBehavior::kReject || attempts > config_.max_retries) {
      throw Error(ErrorKind::kThrottled,
                  fmt::format("{} request to bucket {} throttled {} times", write ? "write" : "read", bucket_name,
                              attempts));
    }
    co_await sim_.sleep_for(config_.retry_delay);
  }
}

Task<RequestReceipt> ObjectStore::put(Node& node, std::string bucket_name, std::string key, Bytes data,
                                      Scale scale) {
  (void)bucket(bucket_name);
  check_key(key);
  if (scale.factor < 1) throw Error(ErrorKind::kInvalidArgument, "scale must be at least 1");
  const SimTime start = sim_.now();
  RequestReceipt receipt;
  receipt.throttled_attempts = co_await admit(bucket_name, true);
  ledger_.charge_write(bucket_name);
  receipt.logical_bytes = scale.logical(data.size());
  co_await sim_.sleep_for(node.egress().next_latency());
  co_await node.egress().transfer(receipt.logical_bytes);
  seed(bucket_name, key, std::move(data), scale);
  receipt.duration = sim_.now() - start;
  co_return receipt;
}

Task<std::optional<GetResult>> ObjectStore::try_get(Node& node, std::string bucket_name, std::string key,
                                                    ByteRange range) {
  (void)bucket(bucket_name);
  const SimTime start = sim_.now();
  GetResult result;
  result.receipt.throttled_attempts = co_await admit(bucket_name, false);
  co_await sim_.sleep_for(node.ingress().next_latency());

  const auto& objects = bucket(bucket_name).objects;
  auto it = objects.find(key);
  if (it == objects.end()) {
    ledger_.charge_read(bucket_name, false);
    co_return std::nullopt;
  }
  ledger_.charge_read(bucket_name, true);
  const Blob blob = it->second;
  const std::uint64_t size = blob.data->size();
  std::uint64_t first = 0, count = size;
  switch (range.kind) {
    case ByteRange::Kind::kFull:
      break;
    case ByteRange::Kind::kSpan:
      if (range.offset > size || range.length > size - range.offset) {
        throw Error(ErrorKind::kInvalidRange, fmt::format("{}/{}: range [{}, +{}) outside object of {} bytes",
                                                          bucket_name, key, range.offset, range.length, size));
      }
      first = range.offset;
      count = range.length;
      break;
    case ByteRange::Kind::kSuffix:
      count = std::min(range.length, size);
      first = size - count;
      break;
  }
  result.object_size = size;
  result.receipt.logical_bytes = blob.scale.logical(size, first, count);
  co_await node.ingress().transfer(result.receipt.logical_bytes);
  result.data.assign(blob.data->begin() + static_cast<std::ptrdiff_t>(first),
                     blob.data->begin() + static_cast<std::ptrdiff_t>(first + count));
  result.receipt.duration = sim_.now() - start;
  co_return std::optional<GetResult>(std::move(result));
}

Task<GetResult> ObjectStore::get(Node& node, std::string bucket_name, std::string key, ByteRange range) {
  auto r = co_await try_get(node, bucket_name, key, range);
  if (!r) throw Error(ErrorKind::kNotFound, bucket_name + "/" + key);
  co_return std::move(*r);
}

Task<std::vector<std::string>> ObjectStore::list(Node& node, std::string bucket_name, std::string prefix) {
  (void)bucket(bucket_name);
  std::vector<std::string> out;
  std::string after;  // continuation marker: last key of the previous page
  bool more = true;
  while (more) {
    co_await admit(bucket_name, false);
    ledger_.charge_list(bucket_name);
    co_await sim_.sleep_for(node.ingress().next_latency());
    const auto& objects = bucket(bucket_name).objects;
    auto it = out.empty() ? objects.lower_bound(prefix) : objects.upper_bound(after);
    std::size_t page = 0;
    more = false;
    for (; it != objects.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
      if (page == config_.max_keys_per_list) {
        more = true;
        break;
      }
      out.push_back(it->first);
      ++page;
    }
    if (!out.empty()) after = out.back();
  }
  co_return out;
}

std::optional<std::uint64_t> ObjectStore::object_size(const std::string& bucket_name, const std::string& key) const {
  const auto& objects = bucket(bucket_name).objects;
  auto it = objects.find(key);
  if (it == objects.end()) return std::nullopt;
  return it->second.data->size();
}

std::shared_ptr<const Bytes> ObjectStore::peek(const std::string& bucket_name, const std::string& key) const {
  const auto& objects = bucket(bucket_name).objects;
  auto it = objects.find(key);
  return it == objects.end() ? nullptr : it->second.data;
}

std::optional<Scale> ObjectStore::scale_of(const std::string& bucket_name, const std::string& key) const {
  const auto& objects = bucket(bucket_name).objects;
  auto it = objects.find(key);
  if (it == objects.end()) return std::nullopt;
  return it->second.scale;
}

std::vector<std::string> ObjectStore::keys(const std::string& bucket_name, const std::string& prefix) const {
  std::vector<std::string> out;
  const auto& objects = bucket(bucket_name).objects;
  for (auto it = objects.lower_bound(prefix); it != objects.end() && it->first.compare(0, prefix.size(), prefix) == 0;
       ++it)
    out.push_back(it->first);
  return out;
}

BucketStats ObjectStore::stats(const std::string& bucket_name) const {
  const auto& b = bucket(bucket_name);
  return BucketStats{b.reads.peak_per_second(), b.writes.peak_per_second(), b.throttled};
}

std::vector<std::string> ObjectStore::bucket_names() const {
  std::vector<std::string> out;
  for (const auto& [name, b] : buckets_) out.push_back(name);
  return out;
}

}  // namespace lambada::sim
