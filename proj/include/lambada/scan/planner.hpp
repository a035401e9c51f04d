#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lambada/lcf/format.hpp"
#include "lambada/lcf/reader.hpp"

namespace lambada::scan {

struct ScanConfig {
  std::uint64_t chunk_size_bytes = 1024 * 1024;
  int max_connections = 4;
  int row_group_prefetch = 2;
  bool metadata_prefetch = true;
  int decompress_threads = 1;
  std::uint64_t footer_tail_window = lcf::kFooterTailWindow;
  /// CPU cost of decoding codec-compressed chunks; unset uses the codec's own figure.
  std::optional<double> codec_decode_ns_per_byte;
  /// CPU cost of decoding plain and RLE chunks.
  double light_decode_ns_per_byte = 0.0;
  /// Disabling pruning downloads every row group (used to check pruning soundness).
  bool prune = true;

  /// Throws Error(kInvalidArgument).
  void validate() const;
};

/// Which kind of concurrency a request exploits: 4 metadata of different
/// files, 3 several row groups, 2 several column chunks of one group,
/// 1 several ranges of one chunk.
enum class Level : int { kRange = 1, kColumnChunks = 2, kRowGroups = 3, kFiles = 4 };

inline constexpr std::size_t kFooterPart = std::numeric_limits<std::size_t>::max();

struct PlannedRequest {
  Level level = Level::kColumnChunks;
  std::size_t group = kFooterPart;   // row-group index within the file
  std::size_t column = kFooterPart;  // schema column index
  std::uint64_t offset = 0;          // byte range within the file
  std::uint64_t length = 0;
  int slot = 0;                      // 0 is the metadata connection; data slots are 1..connections
};

struct DownloadPlan {
  int lanes = 0;        // row groups in flight
  int connections = 0;  // data connections
  std::vector<std::size_t> groups;  // surviving groups in scan order
  std::vector<PlannedRequest> requests;

  std::size_t metadata_requests() const;
  std::size_t data_requests() const { return requests.size() - metadata_requests(); }
  std::uint64_t data_bytes() const;
  /// Data requests of one connection, in issue order.
  std::vector<PlannedRequest> slot_requests(int slot) const;
  /// Human-readable listing, one request per line.
  std::string dump() const;
};

/// Number of GETs fetch_footer issues for a file of `file_size` stored bytes
/// whose encoded footer is `footer_len` bytes.
int footer_requests(std::uint64_t file_size, std::uint64_t footer_len, std::uint64_t tail_window,
                    const sim::Scale& scale = {});

/// Plans the GETs of one file. Connections are used, in priority order, for
/// the metadata prefetch (its own connection), up to row_group_prefetch row
/// groups in flight, the column chunks of one group, and only when a single
/// group is in flight and has fewer chunks than connections, for splitting
/// chunks into ranged requests: each chunk gets at most its share of the
/// connections and every range but the last is at least chunk_size. Each data request is bound to the connection with the
/// least bytes assigned so far; a connection serves its requests in order. `memory_available` bounds the bytes of groups in flight.
/// Offsets are stored bytes; chunk_size, the footer window and the memory
/// bound are logical bytes, related by the object's `scale`.
DownloadPlan plan_downloads(const lcf::FileFooter& footer, std::uint64_t file_size,
                            const std::vector<std::size_t>& groups, const std::vector<std::size_t>& columns,
                            const ScanConfig& config,
                            std::uint64_t memory_available = std::numeric_limits<std::uint64_t>::max(),
                            const sim::Scale& scale = {});

}  // namespace lambada::scan
