#include "lambada/lcf/codec.hpp"

#include <zlib.h>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::lcf {

namespace {

std::vector<std::uint8_t> zlib_compress(std::span<const std::uint8_t> in) {
  uLongf bound = compressBound(static_cast<uLong>(in.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, in.data(), static_cast<uLong>(in.size()), 6) != Z_OK)
    throw Error(ErrorKind::kInvalidArgument, "zlib compression failed");
  out.resize(bound);
  return out;
}

std::vector<std::uint8_t> zlib_decompress(std::span<const std::uint8_t> in, std::uint64_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf len = static_cast<uLongf>(expected);
  const int rc = uncompress(out.data(), &len, in.data(), static_cast<uLong>(in.size()));
  if (rc != Z_OK || len != expected)
    throw Error(ErrorKind::kCorruptChunk, fmt::format("zlib: rc {} ({} of {} bytes)", rc, len, expected));
  return out;
}

}  // namespace

CodecRegistry::CodecRegistry() {
  // decode cost in the range measured for gzip on one core (~150 MB/s)
  add(Codec{2, "zlib", zlib_compress, zlib_decompress, 6.5});
}

CodecRegistry& CodecRegistry::global() {
  static CodecRegistry registry;
  return registry;
}

void CodecRegistry::add(Codec codec) {
  if (codec.id < 2) throw Error(ErrorKind::kInvalidArgument, "codec ids 0 and 1 are built-in encodings");
  if (!codec.compress || !codec.decompress) throw Error(ErrorKind::kInvalidArgument, "codec needs both directions");
  codecs_[codec.id] = std::move(codec);
}

const Codec* CodecRegistry::find(std::uint8_t id) const {
  auto it = codecs_.find(id);
  return it == codecs_.end() ? nullptr : &it->second;
}

}  // namespace lambada::lcf
