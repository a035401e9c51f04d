#pragma once

// LCF: a small columnar file format with row groups, column chunks and
// per-chunk min/max statistics. Byte layout (little-endian throughout):
//
//   [column chunk bytes of row group 0] ... [row group N-1]
//   footer
//   footer_len: u32
//   "LCF1"
//
// See FORMAT.md for the footer encoding and an annotated example.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lambada::lcf {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr char kMagic[4] = {'L', 'C', 'F', '1'};
inline constexpr std::size_t kTrailerBytes = 8;  // footer_len + magic

enum class ColumnType : std::uint8_t { kInt64 = 0, kFloat64 = 1 };

std::string_view type_name(ColumnType t);

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::kInt64;

  bool operator==(const ColumnDef&) const = default;
};

class Schema {
 public:
  Schema() = default;
  /// Throws Error(kInvalidArgument) on duplicate or empty names, or no columns.
  explicit Schema(std::vector<ColumnDef> columns);

  const std::vector<ColumnDef>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  const ColumnDef& operator[](std::size_t i) const { return columns_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// As index_of but throws Error(kUnknownColumn).
  std::size_t require(std::string_view name) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<ColumnDef> columns_;
};

using Column = std::variant<std::vector<std::int64_t>, std::vector<double>>;

std::size_t column_size(const Column& c);
ColumnType column_type(const Column& c);

/// Column-major table; all columns have the same length.
struct Table {
  std::vector<Column> columns;

  std::size_t rows() const { return columns.empty() ? 0 : column_size(columns.front()); }
  bool operator==(const Table&) const = default;
};

/// Encoding ids stored in the footer. Ids >= 2 name codecs from the registry.
namespace encoding {
inline constexpr std::uint8_t kPlain = 0;
inline constexpr std::uint8_t kRle = 1;
inline constexpr std::uint8_t kZlib = 2;
}  // namespace encoding

/// Min/max of one chunk as the raw 8-byte little-endian images of the column type.
struct ColumnStats {
  std::uint64_t min_bits = 0;
  std::uint64_t max_bits = 0;

  std::int64_t min_i64() const { return static_cast<std::int64_t>(min_bits); }
  std::int64_t max_i64() const { return static_cast<std::int64_t>(max_bits); }
  double min_f64() const;
  double max_f64() const;
  static ColumnStats of_i64(std::int64_t lo, std::int64_t hi);
  static ColumnStats of_f64(double lo, double hi);

  bool operator==(const ColumnStats&) const = default;
};

struct ColumnChunkMeta {
  std::uint64_t offset = 0;
  std::uint64_t compressed_len = 0;
  std::uint64_t uncompressed_len = 0;
  std::uint8_t encoding = encoding::kPlain;
  ColumnStats stats;

  bool operator==(const ColumnChunkMeta&) const = default;
};

struct RowGroupMeta {
  std::uint64_t row_count = 0;
  std::vector<ColumnChunkMeta> columns;

  /// Bytes of the chunks of this group from first offset to last end.
  std::uint64_t byte_size() const;
  bool operator==(const RowGroupMeta&) const = default;
};

struct FileFooter {
  std::uint16_t version = kFormatVersion;
  Schema schema;
  std::vector<RowGroupMeta> row_groups;

  std::uint64_t total_rows() const;
  bool operator==(const FileFooter&) const = default;
};

/// How the writer encodes chunks: one mode for all columns, with per-column overrides.
/// kAuto picks RLE when it is smaller than plain.
struct EncodingPolicy {
  enum class Mode { kPlain, kRle, kAuto, kCodec };
  Mode mode = Mode::kPlain;
  std::uint8_t codec = encoding::kZlib;  // used by kCodec
  std::vector<std::pair<std::string, std::uint8_t>> overrides;  // column name -> encoding id
};

/// Serializes row groups. Throws Error(kEmptyRowGroup) on a group without rows,
/// Error(kTypeMismatch) when columns disagree with the schema, have unequal
/// lengths, or a FLOAT64 column holds NaN.
std::vector<std::uint8_t> write_file(const Schema& schema, const std::vector<Table>& row_groups,
                                     const EncodingPolicy& policy = {});

/// Splits `table` into row groups of at most `rows_per_group` rows.
std::vector<Table> split_rows(const Table& table, std::size_t rows_per_group);

/// Encoded footer bytes (without footer_len and magic).
std::vector<std::uint8_t> encode_footer(const FileFooter& footer);
/// Parses footer bytes; `data_end` is the file offset where the footer starts,
/// used to check chunk ranges. Throws Error(kCorruptFooter).
FileFooter decode_footer(std::span<const std::uint8_t> bytes, std::uint64_t data_end);

/// Footer length from the trailing bytes of a file (`tail` ends at end of file).
/// Throws Error(kBadMagic) or Error(kCorruptFooter) when the trailer cannot be
/// valid for `file_size`.
std::uint32_t parse_trailer(std::span<const std::uint8_t> tail, std::uint64_t file_size);

/// Parses the footer of a complete file in memory.
FileFooter read_footer(std::span<const std::uint8_t> file);

/// Decodes one chunk. Throws Error(kCorruptChunk) on length mismatch, bad
/// run counts or an unknown codec.
Column decode_chunk(const ColumnChunkMeta& meta, ColumnType type, std::uint64_t rows,
                    std::span<const std::uint8_t> bytes);

/// Decodes the given columns (all when empty) of one row group of an in-memory file.
Table read_row_group(std::span<const std::uint8_t> file, const FileFooter& footer, std::size_t group,
                     const std::vector<std::size_t>& columns = {});

/// Decodes all row groups of an in-memory file.
std::vector<Table> read_file(std::span<const std::uint8_t> file);

/// Row-wise concatenation of tables with the same column layout.
Table concat(const std::vector<Table>& parts);

}  // namespace lambada::lcf
