#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lambada::lcf {

/// A heavy-weight codec applied to the plain encoding of a chunk.
struct Codec {
  std::uint8_t id = 0;
  std::string name;
  std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>)> compress;
  /// Receives the expected uncompressed length; throws on corrupt input.
  std::function<std::vector<std::uint8_t>(std::span<const std::uint8_t>, std::uint64_t)> decompress;
  /// Modeled decode cost in CPU-nanoseconds per uncompressed byte at one vCPU.
  double decode_ns_per_byte = 0;
};

/// Codec ids >= 2. Zlib (id 2) is always present.
class CodecRegistry {
 public:
  static CodecRegistry& global();

  /// Adds or replaces a codec. Throws Error(kInvalidArgument) for ids 0 and 1.
  void add(Codec codec);
  const Codec* find(std::uint8_t id) const;

 private:
  CodecRegistry();
  std::map<std::uint8_t, Codec> codecs_;
};

}  // namespace lambada::lcf
