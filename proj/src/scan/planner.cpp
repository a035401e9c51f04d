#include "lambada/scan/planner.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "lambada/sim/error.hpp"

namespace lambada::scan {

void ScanConfig::validate() const {
  if (chunk_size_bytes < 64 * 1024) throw Error(ErrorKind::kInvalidArgument, "chunk_size must be at least 64 KiB");
  if (max_connections < 1) throw Error(ErrorKind::kInvalidArgument, "max_connections must be at least 1");
  if (row_group_prefetch < 1) throw Error(ErrorKind::kInvalidArgument, "row_group_prefetch must be at least 1");
  if (decompress_threads < 1 || decompress_threads > 2)
    throw Error(ErrorKind::kInvalidArgument, "decompress_threads must be 1 or 2");
  if (footer_tail_window < lcf::kTrailerBytes) throw Error(ErrorKind::kInvalidArgument, "footer window too small");
  if (light_decode_ns_per_byte < 0 || codec_decode_ns_per_byte.value_or(0) < 0)
    throw Error(ErrorKind::kInvalidArgument, "decode cost must be non-negative");
}

std::size_t DownloadPlan::metadata_requests() const {
  return static_cast<std::size_t>(
      std::count_if(requests.begin(), requests.end(), [](const auto& r) { return r.level == Level::kFiles; }));
}

std::uint64_t DownloadPlan::data_bytes() const {
  std::uint64_t n = 0;
  for (const auto& r : requests)
    if (r.level != Level::kFiles) n += r.length;
  return n;
}

std::vector<PlannedRequest> DownloadPlan::slot_requests(int slot) const {
  std::vector<PlannedRequest> out;
  for (const auto& r : requests)
    if (r.level != Level::kFiles && r.slot == slot) out.push_back(r);
  return out;
}

std::string DownloadPlan::dump() const {
  std::string out = fmt::format("plan lanes={} connections={} groups={} requests={}\n", lanes, connections,
                                groups.size(), requests.size());
  for (const auto& r : requests) {
    if (r.level == Level::kFiles) {
      out += fmt::format("  L4 slot=0 footer bytes=[{}, {})\n", r.offset, r.offset + r.length);
    } else {
      out += fmt::format("  L{} slot={} rg={} col={} bytes=[{}, {})\n", static_cast<int>(r.level), r.slot, r.group,
                         r.column, r.offset, r.offset + r.length);
    }
  }
  return out;
}

namespace {

std::uint64_t stored_window(std::uint64_t file_size, std::uint64_t tail_window, const sim::Scale& scale) {
  return std::min(file_size, std::max<std::uint64_t>(lcf::kTrailerBytes, scale.stored_suffix(file_size, tail_window)));
}

}  // namespace

int footer_requests(std::uint64_t file_size, std::uint64_t footer_len, std::uint64_t tail_window,
                    const sim::Scale& scale) {
  return footer_len + lcf::kTrailerBytes <= stored_window(file_size, tail_window, scale) ? 1 : 2;
}

DownloadPlan plan_downloads(const lcf::FileFooter& footer, std::uint64_t file_size,
                            const std::vector<std::size_t>& groups, const std::vector<std::size_t>& columns,
                            const ScanConfig& config, std::uint64_t memory_available, const sim::Scale& scale) {
  config.validate();
  DownloadPlan plan;
  plan.groups = groups;

  // level 4: footer on the metadata connection
  const std::uint64_t footer_len = lcf::encode_footer(footer).size();
  const std::uint64_t tail = stored_window(file_size, config.footer_tail_window, scale);
  plan.requests.push_back({Level::kFiles, kFooterPart, kFooterPart, file_size - tail, tail, 0});
  if (footer_requests(file_size, footer_len, config.footer_tail_window, scale) == 2) {
    const std::uint64_t start = file_size - footer_len - lcf::kTrailerBytes;
    plan.requests.push_back({Level::kFiles, kFooterPart, kFooterPart, start, file_size - tail - start, 0});
  }
  if (groups.empty()) return plan;

  // level 3: row groups in flight, bounded by memory
  std::uint64_t largest = 1;
  for (std::size_t g : groups) {
    std::uint64_t bytes = 0;
    for (std::size_t c : columns) bytes += footer.row_groups.at(g).columns.at(c).compressed_len;
    largest = std::max(largest, bytes * scale.factor);
  }
  const std::uint64_t fit = std::max<std::uint64_t>(1, memory_available / largest);
  plan.lanes = static_cast<int>(std::min<std::uint64_t>(
      {static_cast<std::uint64_t>(config.row_group_prefetch), groups.size(),
       static_cast<std::uint64_t>(config.max_connections), fit}));
  plan.connections = config.max_connections;

  // level 1 only when a single group is in flight and its chunks leave connections idle
  const bool split = plan.lanes == 1 && columns.size() < static_cast<std::size_t>(config.max_connections);
  const Level whole = plan.lanes > 1 ? Level::kRowGroups : Level::kColumnChunks;
  const std::uint64_t piece = std::max<std::uint64_t>(1, config.chunk_size_bytes / scale.factor);
  std::vector<std::uint64_t> load(static_cast<std::size_t>(config.max_connections), 0);
  for (std::size_t g : groups) {
    for (std::size_t c : columns) {
      const auto& m = footer.row_groups.at(g).columns.at(c);
      // ranges of at least chunk_size, no more of them than connections per chunk
      const std::uint64_t per_chunk = static_cast<std::uint64_t>(config.max_connections) / columns.size();
      const std::uint64_t size = split ? std::max(piece, (m.compressed_len + per_chunk - 1) / per_chunk) : 0;
      const bool pieces = split && m.compressed_len > size;
      for (std::uint64_t off = 0; off < m.compressed_len; off += pieces ? size : m.compressed_len) {
        const std::uint64_t len = pieces ? std::min(size, m.compressed_len - off) : m.compressed_len;
        const auto it = std::min_element(load.begin(), load.end());
        *it += len;
        plan.requests.push_back(
            {pieces ? Level::kRange : whole, g, c, m.offset + off, len, 1 + static_cast<int>(it - load.begin())});
      }
    }
  }
  return plan;
}

}  // namespace lambada::scan
