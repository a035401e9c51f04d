#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lambada::exchange {

enum class WriteCombining { kOff, kOffsetsFile, kOffsetsInName };

struct ObjectName {
  std::string bucket;
  std::string key;

  bool operator==(const ObjectName&) const = default;
  auto operator<=>(const ObjectName&) const = default;
};

/// Maps exchange objects to buckets and keys. Keys live under
/// x{id}/l{level}/g{group}/ so that one list per group finds every sender.
/// Buckets are "{prefix}-{i}" for i < buckets; an object goes to bucket
/// (group * width + d) mod buckets, where d is the receiver's digit for plain
/// partitions, the sender's digit for combined files, and 0 when offsets are
/// in the name (a group then shares one bucket and one list finds it).
struct NamingScheme {
  std::string bucket_prefix = "xchg";
  std::uint32_t buckets = 1;
  std::uint64_t exchange_id = 0;

  std::string bucket(std::uint64_t index) const;
  std::vector<std::string> all_buckets() const;
  std::string group_prefix(int level, std::uint64_t group) const;

  ObjectName partition(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                       std::uint64_t receiver, std::uint64_t receiver_digit) const;
  ObjectName combined(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                      std::uint64_t sender_digit) const;
  ObjectName offsets(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                     std::uint64_t sender_digit) const;
  /// Combined file whose key ends in the part offsets. Throws Error(kKeyTooLong).
  ObjectName combined_with_offsets(int level, std::uint64_t group, std::uint64_t sender,
                                   const std::vector<std::uint64_t>& offsets) const;
  /// Bucket shared by a group when offsets are in the name.
  std::string named_bucket(std::uint64_t group) const;
};

/// "{o0}_{o1}_..._{on}-off"
std::string encode_offsets(const std::vector<std::uint64_t>& offsets);
/// Inverse of encode_offsets; nullopt on malformed text.
std::optional<std::vector<std::uint64_t>> decode_offsets(const std::string& text);

/// Sender and offsets parsed from a key produced by combined_with_offsets.
struct NamedFile {
  std::uint64_t sender = 0;
  std::vector<std::uint64_t> offsets;
};
std::optional<NamedFile> parse_named_key(const std::string& key, const std::string& group_prefix);

/// Offsets of parts of the given sizes: [0, s0, s0 + s1, ..., total].
std::vector<std::uint64_t> part_offsets(const std::vector<std::uint64_t>& sizes);

}  // namespace lambada::exchange
