#include "lambada/bench/lineitem.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "lambada/lcf/reader.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::bench {
namespace {

enum Col { kOrderkey, kPartkey, kSuppkey, kLinenumber, kQuantity, kExtendedprice, kDiscount, kTax, kReturnflag,
           kLinestatus, kShipdate, kCommitdate, kReceiptdate, kColumns };

constexpr std::int64_t kLastOrderDate = 2405;  // 1998-08-02

}  // namespace

const lcf::Schema& lineitem_schema() {
  static const lcf::Schema schema([] {
    std::vector<lcf::ColumnDef> cols;
    for (const char* n : {"orderkey", "partkey", "suppkey", "linenumber", "quantity", "extendedprice", "discount",
                          "tax", "returnflag", "linestatus", "shipdate", "commitdate", "receiptdate"})
      cols.push_back({n, lcf::ColumnType::kInt64});
    return cols;
  }());
  return schema;
}

void GenSpec::validate() const {
  if (files < 1) throw Error(ErrorKind::kConfigError, "gen: files must be positive");
  if (groups_per_file < 1) throw Error(ErrorKind::kConfigError, "gen: groups_per_file must be positive");
  if (replication < 1) throw Error(ErrorKind::kConfigError, "gen: replication must be positive");
  if (object_scale < 1) throw Error(ErrorKind::kConfigError, "gen: object_scale must be positive");
  if (!lineitem_schema().index_of(sort_key)) throw Error(ErrorKind::kConfigError, "gen: unknown sort key " + sort_key);
  if (base_rows() < files * groups_per_file)
    throw Error(ErrorKind::kConfigError, "gen: fewer rows than row groups; raise target_bytes or rows_per_file");
}

std::uint64_t GenSpec::base_rows() const {
  if (rows_per_file) return rows_per_file * files;
  return target_bytes / (8 * kColumns * object_scale);
}

lcf::Table lineitem_rows(std::uint64_t rows, std::uint64_t seed, const std::string& sort_key) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };
  std::vector<std::vector<std::int64_t>> c(kColumns, std::vector<std::int64_t>(rows));
  std::int64_t order = 0, line = 0, lines_in_order = 0, orderdate = 0;
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (line == lines_in_order) {
      order += uniform(1, 4);
      lines_in_order = uniform(1, 7);
      line = 0;
      orderdate = uniform(0, kLastOrderDate);
    }
    ++line;
    const std::int64_t qty = uniform(1, 50);
    const std::int64_t ship = orderdate + uniform(1, 121);
    const std::int64_t receipt = ship + uniform(1, 30);
    c[kOrderkey][r] = order;
    c[kPartkey][r] = uniform(1, 200000);
    c[kSuppkey][r] = uniform(1, 10000);
    c[kLinenumber][r] = line;
    c[kQuantity][r] = qty;
    c[kExtendedprice][r] = qty * uniform(90100, 104900);
    c[kDiscount][r] = uniform(0, 10);
    c[kTax][r] = uniform(0, 8);
    c[kReturnflag][r] = receipt <= day::k1995_06_17 ? (rng() % 2 ? 2 : 0) : 1;
    c[kLinestatus][r] = ship > day::k1995_06_17 ? 1 : 0;
    c[kShipdate][r] = ship;
    c[kCommitdate][r] = orderdate + uniform(30, 90);
    c[kReceiptdate][r] = receipt;
  }
  const auto& key = c[lineitem_schema().require(sort_key)];
  std::vector<std::uint32_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0u);
  std::stable_sort(perm.begin(), perm.end(), [&](std::uint32_t a, std::uint32_t b) { return key[a] < key[b]; });
  lcf::Table t;
  for (auto& col : c) {
    std::vector<std::int64_t> sorted(rows);
    for (std::uint64_t r = 0; r < rows; ++r) sorted[r] = col[perm[r]];
    t.columns.emplace_back(std::move(sorted));
  }
  return t;
}

std::vector<sim::Bytes> lineitem_files(const GenSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::uint64_t rows = spec.base_rows();
  const lcf::Table all = lineitem_rows(rows, seed, spec.sort_key);
  std::vector<sim::Bytes> files;
  for (std::uint64_t f = 0; f < spec.files; ++f) {
    const std::uint64_t begin = rows * f / spec.files, end = rows * (f + 1) / spec.files;
    lcf::Table part;
    for (const auto& col : all.columns) {
      const auto& v = std::get<std::vector<std::int64_t>>(col);
      part.columns.emplace_back(std::vector<std::int64_t>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                                          v.begin() + static_cast<std::ptrdiff_t>(end)));
    }
    const std::uint64_t per_group = (end - begin + spec.groups_per_file - 1) / spec.groups_per_file;
    files.push_back(lcf::write_file(lineitem_schema(), lcf::split_rows(part, per_group), spec.encoding));
  }
  return files;
}

Dataset install(sim::ObjectStore& store, const GenSpec& spec, const std::vector<sim::Bytes>& files) {
  Dataset d;
  d.bucket = spec.bucket;
  if (!store.has_bucket(spec.bucket)) store.create_bucket(spec.bucket);
  for (std::size_t f = 0; f < files.size(); ++f) {
    const sim::Scale scale = lcf::file_scale(files[f], spec.object_scale);
    const std::uint64_t rows = lcf::read_footer(files[f]).total_rows();
    for (std::uint32_t r = 0; r < spec.replication; ++r) {
      std::string key = spec.replication == 1 ? fmt::format("{}part-{:05}.lcf", spec.prefix, f)
                                              : fmt::format("{}part-{:05}-r{:03}.lcf", spec.prefix, f, r);
      store.seed(spec.bucket, key, files[f], scale);
      d.keys.push_back(std::move(key));
      d.rows += rows;
      d.stored_bytes += files[f].size();
      d.logical_bytes += scale.logical(files[f].size());
    }
  }
  return d;
}

Dataset generate(sim::ObjectStore& store, const GenSpec& spec, std::uint64_t seed) {
  return install(store, spec, lineitem_files(spec, seed));
}

std::vector<lcf::Table> read_dataset(const sim::ObjectStore& store, const Dataset& dataset) {
  std::vector<lcf::Table> out;
  for (const auto& key : dataset.keys) {
    auto bytes = store.peek(dataset.bucket, key);
    if (!bytes) throw Error(ErrorKind::kNotFound, dataset.bucket + "/" + key);
    out.push_back(lcf::concat(lcf::read_file(*bytes)));
  }
  return out;
}

}  // namespace lambada::bench
