#include "lambada/lcf/format.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include <fmt/format.h>

#include "lambada/kernels/kernels.hpp"
#include "lambada/lcf/codec.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::lcf {

namespace {

using ByteVec = std::vector<std::uint8_t>;

template <typename T>
void put_le(ByteVec& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

/// Bounds-checked little-endian cursor; throws `kind` on overrun.
class Cursor {
 public:
  Cursor(std::span<const std::uint8_t> bytes, ErrorKind kind) : bytes_(bytes), kind_(kind) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw Error(kind_, fmt::format("truncated at byte {} (need {} more)", pos_, n));
  }
  std::span<const std::uint8_t> bytes_;
  ErrorKind kind_;
  std::size_t pos_ = 0;
};

template <typename T>
std::uint64_t to_bits(T v) {
  if constexpr (std::is_same_v<T, double>) return std::bit_cast<std::uint64_t>(v);
  else return static_cast<std::uint64_t>(v);
}

template <typename T>
T from_bits(std::uint64_t b) {
  if constexpr (std::is_same_v<T, double>) return std::bit_cast<double>(b);
  else return static_cast<T>(b);
}

template <typename T>
void append_plain(ByteVec& out, std::span<const T> values) {
  const std::size_t base = out.size();
  out.resize(base + values.size() * 8);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data() + base, values.data(), values.size() * 8);
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint64_t b = to_bits(values[i]);
      for (int k = 0; k < 8; ++k) out[base + i * 8 + k] = static_cast<std::uint8_t>(b >> (8 * k));
    }
  }
}

template <typename T>
ByteVec encode_rle(std::span<const T> values) {
  ByteVec out;
  std::size_t i = 0;
  while (i < values.size()) {
    const std::uint64_t bits = to_bits(values[i]);
    std::size_t j = i + 1;
    while (j < values.size() && to_bits(values[j]) == bits && j - i < UINT32_MAX) ++j;
    put_le<std::uint64_t>(out, bits);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::vector<T> decode_plain(std::span<const std::uint8_t> bytes, std::uint64_t rows) {
  if (bytes.size() != rows * 8)
    throw Error(ErrorKind::kCorruptChunk, fmt::format("plain chunk of {} bytes for {} rows", bytes.size(), rows));
  std::vector<T> out(rows);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), bytes.data(), bytes.size());
  } else {
    Cursor c(bytes, ErrorKind::kCorruptChunk);
    for (auto& v : out) v = from_bits<T>(c.get<std::uint64_t>());
  }
  return out;
}

template <typename T>
std::vector<T> decode_rle(std::span<const std::uint8_t> bytes, std::uint64_t rows) {
  if (bytes.size() % 12 != 0)
    throw Error(ErrorKind::kCorruptChunk, fmt::format("RLE chunk of {} bytes is not a whole number of runs", bytes.size()));
  std::vector<T> out;
  out.reserve(rows);
  Cursor c(bytes, ErrorKind::kCorruptChunk);
  while (c.remaining() > 0) {
    const T v = from_bits<T>(c.get<std::uint64_t>());
    const std::uint32_t n = c.get<std::uint32_t>();
    if (n == 0 || out.size() + n > rows)
      throw Error(ErrorKind::kCorruptChunk, fmt::format("RLE run of {} overflows {} rows", n, rows));
    out.insert(out.end(), n, v);
  }
  if (out.size() != rows)
    throw Error(ErrorKind::kCorruptChunk, fmt::format("RLE runs cover {} of {} rows", out.size(), rows));
  return out;
}

std::uint8_t encoding_for(const EncodingPolicy& policy, const std::string& column) {
  for (const auto& [name, id] : policy.overrides)
    if (name == column) return id;
  switch (policy.mode) {
    case EncodingPolicy::Mode::kPlain: return encoding::kPlain;
    case EncodingPolicy::Mode::kRle: return encoding::kRle;
    case EncodingPolicy::Mode::kCodec: return policy.codec;
    case EncodingPolicy::Mode::kAuto: return 0xff;  // decided per chunk
  }
  return encoding::kPlain;
}

template <typename T>
ColumnChunkMeta write_chunk(ByteVec& out, std::span<const T> values, std::uint8_t enc) {
  ColumnChunkMeta meta;
  meta.offset = out.size();
  meta.uncompressed_len = values.size() * 8;
  const auto mm = kernels::min_max(values);
  meta.stats = ColumnStats{to_bits(mm.min), to_bits(mm.max)};

  if (enc == 0xff) {
    ByteVec rle = encode_rle(values);
    enc = rle.size() < meta.uncompressed_len ? encoding::kRle : encoding::kPlain;
  }
  meta.encoding = enc;
  if (enc == encoding::kPlain) {
    append_plain(out, values);
  } else if (enc == encoding::kRle) {
    ByteVec rle = encode_rle(values);
    out.insert(out.end(), rle.begin(), rle.end());
  } else {
    const Codec* codec = CodecRegistry::global().find(enc);
    if (!codec) throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown codec id {}", enc));
    ByteVec plain;
    append_plain(plain, values);
    ByteVec packed = codec->compress(plain);
    out.insert(out.end(), packed.begin(), packed.end());
  }
  meta.compressed_len = out.size() - meta.offset;
  return meta;
}

}  // namespace

std::string_view type_name(ColumnType t) {
  switch (t) {
    case ColumnType::kInt64: return "INT64";
    case ColumnType::kFloat64: return "FLOAT64";
  }
  return "?";
}

Schema::Schema(std::vector<ColumnDef> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error(ErrorKind::kInvalidArgument, "schema needs at least one column");
  std::set<std::string_view> seen;
  for (const auto& c : columns_) {
    if (c.name.empty()) throw Error(ErrorKind::kInvalidArgument, "column names must not be empty");
    if (c.name.size() > UINT16_MAX) throw Error(ErrorKind::kInvalidArgument, "column name too long");
    if (!seen.insert(c.name).second)
      throw Error(ErrorKind::kInvalidArgument, fmt::format("duplicate column '{}'", c.name));
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::size_t Schema::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw Error(ErrorKind::kUnknownColumn, std::string(name));
}

std::size_t column_size(const Column& c) {
  return std::visit([](const auto& v) { return v.size(); }, c);
}

ColumnType column_type(const Column& c) {
  return std::holds_alternative<std::vector<std::int64_t>>(c) ? ColumnType::kInt64 : ColumnType::kFloat64;
}

double ColumnStats::min_f64() const { return std::bit_cast<double>(min_bits); }
double ColumnStats::max_f64() const { return std::bit_cast<double>(max_bits); }
ColumnStats ColumnStats::of_i64(std::int64_t lo, std::int64_t hi) { return {to_bits(lo), to_bits(hi)}; }
ColumnStats ColumnStats::of_f64(double lo, double hi) { return {to_bits(lo), to_bits(hi)}; }

std::uint64_t RowGroupMeta::byte_size() const {
  if (columns.empty()) return 0;
  std::uint64_t lo = UINT64_MAX, hi = 0;
  for (const auto& c : columns) {
    lo = std::min(lo, c.offset);
    hi = std::max(hi, c.offset + c.compressed_len);
  }
  return hi - lo;
}

std::uint64_t FileFooter::total_rows() const {
  std::uint64_t n = 0;
  for (const auto& g : row_groups) n += g.row_count;
  return n;
}

std::vector<std::uint8_t> write_file(const Schema& schema, const std::vector<Table>& row_groups,
                                     const EncodingPolicy& policy) {
  if (schema.size() == 0) throw Error(ErrorKind::kInvalidArgument, "schema has no columns");
  ByteVec out;
  FileFooter footer;
  footer.schema = schema;
  for (std::size_t g = 0; g < row_groups.size(); ++g) {
    const Table& t = row_groups[g];
    if (t.columns.size() != schema.size())
      throw Error(ErrorKind::kTypeMismatch,
                  fmt::format("row group {} has {} columns, schema has {}", g, t.columns.size(), schema.size()));
    const std::size_t rows = t.rows();
    if (rows == 0) throw Error(ErrorKind::kEmptyRowGroup, fmt::format("row group {}", g));
    RowGroupMeta meta;
    meta.row_count = rows;
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const ColumnDef& def = schema[c];
      const Column& col = t.columns[c];
      if (column_type(col) != def.type)
        throw Error(ErrorKind::kTypeMismatch, fmt::format("column '{}' expects {}, got {}", def.name,
                                                          type_name(def.type), type_name(column_type(col))));
      if (column_size(col) != rows)
        throw Error(ErrorKind::kTypeMismatch,
                    fmt::format("column '{}' has {} rows, row group has {}", def.name, column_size(col), rows));
      const std::uint8_t enc = encoding_for(policy, def.name);
      if (def.type == ColumnType::kInt64) {
        meta.columns.push_back(write_chunk<std::int64_t>(out, std::get<0>(col), enc));
      } else {
        const auto& v = std::get<1>(col);
        if (std::any_of(v.begin(), v.end(), [](double d) { return std::isnan(d); }))
          throw Error(ErrorKind::kTypeMismatch, fmt::format("column '{}' contains NaN", def.name));
        meta.columns.push_back(write_chunk<double>(out, v, enc));
      }
    }
    footer.row_groups.push_back(std::move(meta));
  }
  const ByteVec fb = encode_footer(footer);
  if (fb.size() > UINT32_MAX) throw Error(ErrorKind::kInvalidArgument, "footer too large");
  out.insert(out.end(), fb.begin(), fb.end());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(fb.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  return out;
}

std::vector<Table> split_rows(const Table& table, std::size_t rows_per_group) {
  if (rows_per_group == 0) throw Error(ErrorKind::kInvalidArgument, "rows_per_group must be positive");
  std::vector<Table> out;
  const std::size_t rows = table.rows();
  for (std::size_t begin = 0; begin < rows; begin += rows_per_group) {
    const std::size_t end = std::min(rows, begin + rows_per_group);
    Table part;
    for (const auto& col : table.columns) {
      part.columns.push_back(std::visit(
          [&](const auto& v) -> Column {
            using V = std::decay_t<decltype(v)>;
            return V(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end));
          },
          col));
    }
    out.push_back(std::move(part));
  }
  return out;
}

std::vector<std::uint8_t> encode_footer(const FileFooter& footer) {
  ByteVec out;
  put_le<std::uint16_t>(out, footer.version);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(footer.schema.size()));
  for (const auto& c : footer.schema.columns()) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(c.name.size()));
    out.insert(out.end(), c.name.begin(), c.name.end());
    out.push_back(static_cast<std::uint8_t>(c.type));
  }
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(footer.row_groups.size()));
  for (const auto& g : footer.row_groups) {
    put_le<std::uint64_t>(out, g.row_count);
    for (const auto& c : g.columns) {
      put_le<std::uint64_t>(out, c.offset);
      put_le<std::uint64_t>(out, c.compressed_len);
      put_le<std::uint64_t>(out, c.uncompressed_len);
      out.push_back(c.encoding);
      put_le<std::uint64_t>(out, c.stats.min_bits);
      put_le<std::uint64_t>(out, c.stats.max_bits);
    }
  }
  return out;
}

FileFooter decode_footer(std::span<const std::uint8_t> bytes, std::uint64_t data_end) {
  Cursor c(bytes, ErrorKind::kCorruptFooter);
  FileFooter f;
  f.version = c.get<std::uint16_t>();
  if (f.version != kFormatVersion)
    throw Error(ErrorKind::kCorruptFooter, fmt::format("unsupported version {}", f.version));
  const std::uint32_t ncols = c.get<std::uint32_t>();
  if (ncols == 0 || ncols > c.remaining() / 3)
    throw Error(ErrorKind::kCorruptFooter, fmt::format("implausible column count {}", ncols));
  std::vector<ColumnDef> defs;
  for (std::uint32_t i = 0; i < ncols; ++i) {
    ColumnDef d;
    d.name = c.get_string(c.get<std::uint16_t>());
    const std::uint8_t type = c.get<std::uint8_t>();
    if (type > 1) throw Error(ErrorKind::kCorruptFooter, fmt::format("unknown column type {}", type));
    d.type = static_cast<ColumnType>(type);
    defs.push_back(std::move(d));
  }
  try {
    f.schema = Schema(std::move(defs));
  } catch (const Error& e) {
    throw Error(ErrorKind::kCorruptFooter, e.what());
  }
  const std::uint32_t ngroups = c.get<std::uint32_t>();
  const std::size_t group_bytes = 8 + static_cast<std::size_t>(ncols) * 41;
  if (ngroups > c.remaining() / group_bytes || c.remaining() != ngroups * group_bytes)
    throw Error(ErrorKind::kCorruptFooter, fmt::format("{} row groups do not match {} footer bytes", ngroups,
                                                       c.remaining()));
  std::uint64_t next_free = 0;
  for (std::uint32_t g = 0; g < ngroups; ++g) {
    RowGroupMeta meta;
    meta.row_count = c.get<std::uint64_t>();
    if (meta.row_count == 0) throw Error(ErrorKind::kCorruptFooter, fmt::format("row group {} is empty", g));
    for (std::uint32_t k = 0; k < ncols; ++k) {
      ColumnChunkMeta m;
      m.offset = c.get<std::uint64_t>();
      m.compressed_len = c.get<std::uint64_t>();
      m.uncompressed_len = c.get<std::uint64_t>();
      m.encoding = c.get<std::uint8_t>();
      m.stats.min_bits = c.get<std::uint64_t>();
      m.stats.max_bits = c.get<std::uint64_t>();
      if (m.offset < next_free || m.compressed_len > data_end || m.offset > data_end - m.compressed_len)
        throw Error(ErrorKind::kCorruptFooter,
                    fmt::format("chunk ({}, {}) of row group {} overlaps or exceeds data ending at {}", m.offset,
                                m.compressed_len, g, data_end));
      if (m.uncompressed_len != meta.row_count * 8)
        throw Error(ErrorKind::kCorruptFooter, fmt::format("chunk of {} rows claims {} plain bytes", meta.row_count,
                                                           m.uncompressed_len));
      next_free = m.offset + m.compressed_len;
      meta.columns.push_back(m);
    }
    f.row_groups.push_back(std::move(meta));
  }
  return f;
}

std::uint32_t parse_trailer(std::span<const std::uint8_t> tail, std::uint64_t file_size) {
  if (tail.size() >= 4 && std::memcmp(tail.data() + tail.size() - 4, kMagic, 4) != 0)
    throw Error(ErrorKind::kBadMagic, "no LCF1 trailer");
  if (tail.size() < kTrailerBytes || file_size < kTrailerBytes)
    throw Error(ErrorKind::kCorruptFooter, fmt::format("file of {} bytes is too short", file_size));
  Cursor c(tail.subspan(tail.size() - kTrailerBytes, 4), ErrorKind::kCorruptFooter);
  const std::uint32_t len = c.get<std::uint32_t>();
  if (len > file_size - kTrailerBytes)
    throw Error(ErrorKind::kCorruptFooter, fmt::format("footer length {} exceeds file of {} bytes", len, file_size));
  return len;
}

FileFooter read_footer(std::span<const std::uint8_t> file) {
  const std::uint32_t len = parse_trailer(file, file.size());
  const std::uint64_t start = file.size() - kTrailerBytes - len;
  return decode_footer(file.subspan(start, len), start);
}

Column decode_chunk(const ColumnChunkMeta& meta, ColumnType type, std::uint64_t rows,
                    std::span<const std::uint8_t> bytes) {
  if (bytes.size() != meta.compressed_len)
    throw Error(ErrorKind::kCorruptChunk,
                fmt::format("chunk has {} bytes, footer says {}", bytes.size(), meta.compressed_len));
  ByteVec inflated;
  std::uint8_t enc = meta.encoding;
  if (enc >= 2) {
    const Codec* codec = CodecRegistry::global().find(enc);
    if (!codec) throw Error(ErrorKind::kCorruptChunk, fmt::format("unknown codec id {}", enc));
    try {
      inflated = codec->decompress(bytes, meta.uncompressed_len);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kCorruptChunk) throw;
      throw Error(ErrorKind::kCorruptChunk, e.what());
    }
    bytes = inflated;
    enc = encoding::kPlain;
  }
  auto decode = [&]<typename T>() -> Column {
    return enc == encoding::kPlain ? decode_plain<T>(bytes, rows) : decode_rle<T>(bytes, rows);
  };
  return type == ColumnType::kInt64 ? decode.template operator()<std::int64_t>()
                                    : decode.template operator()<double>();
}

Table read_row_group(std::span<const std::uint8_t> file, const FileFooter& footer, std::size_t group,
                     const std::vector<std::size_t>& columns) {
  const RowGroupMeta& g = footer.row_groups.at(group);
  std::vector<std::size_t> cols = columns;
  if (cols.empty())
    for (std::size_t i = 0; i < footer.schema.size(); ++i) cols.push_back(i);
  Table t;
  for (std::size_t c : cols) {
    const ColumnChunkMeta& m = g.columns.at(c);
    if (m.offset + m.compressed_len > file.size())
      throw Error(ErrorKind::kCorruptChunk, "chunk beyond end of file");
    t.columns.push_back(decode_chunk(m, footer.schema[c].type, g.row_count, file.subspan(m.offset, m.compressed_len)));
  }
  return t;
}

std::vector<Table> read_file(std::span<const std::uint8_t> file) {
  const FileFooter footer = read_footer(file);
  std::vector<Table> out;
  for (std::size_t g = 0; g < footer.row_groups.size(); ++g) out.push_back(read_row_group(file, footer, g));
  return out;
}

Table concat(const std::vector<Table>& parts) {
  Table out;
  for (const auto& p : parts) {
    if (out.columns.empty()) {
      out = p;
      continue;
    }
    if (p.columns.size() != out.columns.size())
      throw Error(ErrorKind::kTypeMismatch, "cannot concatenate tables with different column counts");
    for (std::size_t c = 0; c < p.columns.size(); ++c) {
      std::visit(
          [&](auto& dst) {
            using V = std::decay_t<decltype(dst)>;
            const auto* src = std::get_if<V>(&p.columns[c]);
            if (!src) throw Error(ErrorKind::kTypeMismatch, "cannot concatenate columns of different types");
            dst.insert(dst.end(), src->begin(), src->end());
          },
          out.columns[c]);
    }
  }
  return out;
}

}  // namespace lambada::lcf
