#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lambada/sim/billing.hpp"
#include "lambada/sim/node.hpp"
#include "lambada/sim/rate_limiter.hpp"
#include "lambada/sim/simulator.hpp"

namespace lambada::sim {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxKeyBytes = 1024;

/// Byte range of a GET: the whole object, [offset, offset + length), or the last `length` bytes.
struct ByteRange {
  enum class Kind { kFull, kSpan, kSuffix };
  Kind kind = Kind::kFull;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  static ByteRange full() { return {}; }
  static ByteRange span(std::uint64_t offset, std::uint64_t length) { return {Kind::kSpan, offset, length}; }
  static ByteRange suffix(std::uint64_t length) { return {Kind::kSuffix, 0, length}; }
};

/// Logical bytes per stored byte. The last `unscaled_tail` stored bytes (such
/// as a file footer) stand for themselves.
struct Scale {
  std::uint32_t factor = 1;
  std::uint64_t unscaled_tail = 0;

  Scale(std::uint32_t f = 1, std::uint64_t tail = 0) : factor(f), unscaled_tail(tail) {}
  /// Logical size of stored bytes [first, first + count) of an object of `size` stored bytes.
  std::uint64_t logical(std::uint64_t size, std::uint64_t first, std::uint64_t count) const;
  std::uint64_t logical(std::uint64_t size) const { return logical(size, 0, size); }
  /// Longest stored suffix of an object of `size` stored bytes whose logical size is at most `logical_len`.
  std::uint64_t stored_suffix(std::uint64_t size, std::uint64_t logical_len) const;
};

struct StoreConfig {
  std::int64_t read_limit_per_s = 5500;
  std::int64_t write_limit_per_s = 3500;
  ThrottleBehavior throttle = ThrottleBehavior::kRetry;
  Duration retry_delay = millis(100);
  int max_retries = 50;
  std::size_t max_keys_per_list = 1000;

  void validate() const;
};

struct RequestReceipt {
  Duration duration{0};
  int throttled_attempts = 0;
  std::uint64_t logical_bytes = 0;
};

struct GetResult {
  Bytes data;
  std::uint64_t object_size = 0;  // physical size of the whole object
  RequestReceipt receipt;
};

struct BucketStats {
  std::int64_t peak_reads_per_s = 0;
  std::int64_t peak_writes_per_s = 0;
  std::uint64_t throttled = 0;
};

/// Simulated object store. Objects hold real bytes; `scale` declares how many
/// logical bytes each stored byte stands for, so transfer time and request
/// patterns can model large volumes while keeping the stored data small.
class ObjectStore {
 public:
  ObjectStore(Simulator& sim, BillingLedger& ledger, StoreConfig config = {});
  ObjectStore(const ObjectStore&) = delete;
  ObjectStore& operator=(const ObjectStore&) = delete;

  const StoreConfig& config() const noexcept { return config_; }

  void create_bucket(const std::string& name);
  bool has_bucket(const std::string& name) const { return buckets_.count(name) != 0; }

  /// Places an object without time or billing (dataset setup).
  void seed(const std::string& bucket, const std::string& key, Bytes data, Scale scale = {});

  Task<RequestReceipt> put(Node& node, std::string bucket, std::string key, Bytes data, Scale scale = {});
  /// A missing key yields nullopt; the request is billed either way.
  Task<std::optional<GetResult>> try_get(Node& node, std::string bucket, std::string key,
                                         ByteRange range = ByteRange::full());
  /// As try_get but throws Error(kNotFound).
  Task<GetResult> get(Node& node, std::string bucket, std::string key, ByteRange range = ByteRange::full());
  /// Sorted keys starting with `prefix`; one list request per page of max_keys_per_list.
  Task<std::vector<std::string>> list(Node& node, std::string bucket, std::string prefix);

  // Inspection without time or billing.
  std::optional<std::uint64_t> object_size(const std::string& bucket, const std::string& key) const;
  std::shared_ptr<const Bytes> peek(const std::string& bucket, const std::string& key) const;
  std::optional<Scale> scale_of(const std::string& bucket, const std::string& key) const;
  std::vector<std::string> keys(const std::string& bucket, const std::string& prefix = "") const;
  std::uint64_t stored_bytes() const noexcept { return stored_bytes_; }
  BucketStats stats(const std::string& bucket) const;
  std::vector<std::string> bucket_names() const;

 private:
  struct Blob {
    std::shared_ptr<const Bytes> data;
    Scale scale;
  };
  struct Bucket {
    explicit Bucket(const StoreConfig& c) : reads(c.read_limit_per_s), writes(c.write_limit_per_s) {}
    std::map<std::string, Blob> objects;
    RateLimiter reads;
    RateLimiter writes;
    std::uint64_t throttled = 0;
  };

  Bucket& bucket(const std::string& name);
  const Bucket& bucket(const std::string& name) const;
  Task<int> admit(std::string bucket_name, bool write);

  Simulator& sim_;
  BillingLedger& ledger_;
  StoreConfig config_;
  std::map<std::string, Bucket> buckets_;
  std::uint64_t stored_bytes_ = 0;
};

}  // namespace lambada::sim
