#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lambada::exchange {

struct Record {
  std::uint64_t key = 0;
  std::string value;

  bool operator==(const Record&) const = default;
  auto operator<=>(const Record&) const = default;
};

/// Maps a record key to a hash; the record belongs to worker hash mod P.
using Partitioner = std::function<std::uint64_t(std::uint64_t key)>;

/// 64-bit finalizer mix (splitmix64).
std::uint64_t hash_key(std::uint64_t key) noexcept;
inline std::uint64_t identity_key(std::uint64_t key) noexcept { return key; }

inline std::uint64_t owner(const Partitioner& partitioner, std::uint64_t key, std::uint64_t workers) {
  return partitioner(key) % workers;
}

/// Encoded size of one record: 8-byte key, 4-byte length, value.
std::size_t encoded_size(const Record& r) noexcept;
void encode_append(std::vector<std::uint8_t>& out, const Record& r);
std::vector<std::uint8_t> encode(const std::vector<Record>& records);
/// Throws Error(kCorruptChunk) on truncated input.
std::vector<Record> decode(std::span<const std::uint8_t> bytes);

/// Records grouped by owning worker, each group in input order.
std::vector<std::vector<Record>> partition_oracle(const std::vector<Record>& records, std::uint64_t workers,
                                                  const Partitioner& partitioner);

}  // namespace lambada::exchange
