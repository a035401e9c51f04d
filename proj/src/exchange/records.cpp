#include "lambada/exchange/records.hpp"

#include "lambada/sim/error.hpp"

namespace lambada::exchange {

std::uint64_t hash_key(std::uint64_t key) noexcept {
  std::uint64_t z = key + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t encoded_size(const Record& r) noexcept { return 12 + r.value.size(); }

void encode_append(std::vector<std::uint8_t>& out, const Record& r) {
  std::uint8_t head[12];
  for (int i = 0; i < 8; ++i) head[i] = static_cast<std::uint8_t>(r.key >> (8 * i));
  const auto len = static_cast<std::uint32_t>(r.value.size());
  for (int i = 0; i < 4; ++i) head[8 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  out.insert(out.end(), head, head + 12);
  out.insert(out.end(), r.value.begin(), r.value.end());
}

std::vector<std::uint8_t> encode(const std::vector<Record>& records) {
  std::vector<std::uint8_t> out;
  std::size_t total = 0;
  for (const auto& r : records) total += encoded_size(r);
  out.reserve(total);
  for (const auto& r : records) encode_append(out, r);
  return out;
}

std::vector<Record> decode(std::span<const std::uint8_t> bytes) {
  std::vector<Record> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 12) throw Error(ErrorKind::kCorruptChunk, "truncated record header");
    Record r;
    for (int i = 0; i < 8; ++i) r.key |= std::uint64_t{bytes[pos + i]} << (8 * i);
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= std::uint32_t{bytes[pos + 8 + i]} << (8 * i);
    pos += 12;
    if (bytes.size() - pos < len) throw Error(ErrorKind::kCorruptChunk, "truncated record value");
    r.value.assign(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<Record>> partition_oracle(const std::vector<Record>& records, std::uint64_t workers,
                                                  const Partitioner& partitioner) {
  std::vector<std::vector<Record>> out(workers);
  for (const auto& r : records) out[owner(partitioner, r.key, workers)].push_back(r);
  return out;
}

}  // namespace lambada::exchange
