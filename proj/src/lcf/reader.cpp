#include "lambada/lcf/reader.hpp"

#include <algorithm>

#include "lambada/sim/error.hpp"

namespace lambada::lcf {

sim::Task<FooterFetch> fetch_footer(sim::ObjectStore& store, sim::Node& node, std::string bucket, std::string key,
                                    std::uint64_t tail_window) {
  if (tail_window < kTrailerBytes) throw Error(ErrorKind::kInvalidArgument, "tail window smaller than the trailer");
  FooterFetch out;
  // the window is logical; scaled objects map it to fewer stored bytes
  std::uint64_t window = tail_window;
  if (const auto size = store.object_size(bucket, key))
    window = std::max<std::uint64_t>(kTrailerBytes, store.scale_of(bucket, key)->stored_suffix(*size, tail_window));
  auto tail = co_await store.get(node, bucket, key, sim::ByteRange::suffix(window));
  ++out.requests;
  out.bytes += tail.receipt.logical_bytes;
  out.file_size = tail.object_size;
  const std::uint32_t len = parse_trailer(tail.data, out.file_size);
  const std::uint64_t needed = len + kTrailerBytes;
  const std::uint64_t footer_start = out.file_size - needed;
  if (needed <= tail.data.size()) {
    const std::size_t skip = tail.data.size() - needed;
    out.footer = decode_footer(std::span<const std::uint8_t>(tail.data).subspan(skip, len), footer_start);
    co_return out;
  }
  const std::uint64_t missing = needed - tail.data.size();
  auto head = co_await store.get(node, bucket, key, sim::ByteRange::span(footer_start, missing));
  ++out.requests;
  out.bytes += head.receipt.logical_bytes;
  head.data.insert(head.data.end(), tail.data.begin(), tail.data.end());
  out.footer = decode_footer(std::span<const std::uint8_t>(head.data).first(len), footer_start);
  co_return out;
}

sim::Scale file_scale(std::span<const std::uint8_t> file, std::uint32_t factor) {
  return sim::Scale(factor, parse_trailer(file, file.size()) + kTrailerBytes);
}

}  // namespace lambada::lcf
