#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "lambada/lcf/format.hpp"
#include "lambada/lcf/reader.hpp"
#include "lambada/scan/scan.hpp"
#include "lambada/sim/cloud.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::scan {
namespace {

using lcf::ColumnType;

lcf::Schema test_schema() {
  return lcf::Schema({{"day", ColumnType::kInt64},
                      {"qty", ColumnType::kInt64},
                      {"price", ColumnType::kFloat64},
                      {"disc", ColumnType::kFloat64}});
}

// `rows` rows sorted by day in [0, 1000), split into `groups` row groups.
std::vector<lcf::Table> sorted_groups(std::uint64_t seed, std::size_t rows, std::size_t groups) {
  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> day(rows), qty(rows);
  std::vector<double> price(rows), disc(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    day[i] = static_cast<std::int64_t>(i * 1000 / rows);
    qty[i] = 1 + static_cast<std::int64_t>(rng() % 50);
    price[i] = static_cast<double>(rng() % 100000) / 100.0;
    disc[i] = static_cast<double>(rng() % 11) / 100.0;
  }
  lcf::Table t{{std::move(day), std::move(qty), std::move(price), std::move(disc)}};
  return lcf::split_rows(t, (rows + groups - 1) / groups);
}

// Oracle: decode everything, filter row by row.
lcf::Table oracle(const std::vector<lcf::Table>& groups, const PredicateSet& preds, const lcf::Schema& schema) {
  const auto bound = preds.bind(schema);
  const auto proj = preds.bind_projection(schema);
  std::vector<lcf::Table> parts;
  for (const auto& t : groups) {
    lcf::Table out;
    for (std::size_t c : proj) {
      if (schema[c].type == ColumnType::kInt64) out.columns.emplace_back(std::vector<std::int64_t>{});
      else out.columns.emplace_back(std::vector<double>{});
    }
    for (std::size_t r = 0; r < t.rows(); ++r) {
      bool ok = true;
      for (const auto& p : bound) {
        if (p.type == ColumnType::kInt64) {
          const auto v = std::get<0>(t.columns[p.column])[r];
          ok = ok && std::get<std::int64_t>(p.lo) <= v && v <= std::get<std::int64_t>(p.hi);
        } else {
          const auto v = std::get<1>(t.columns[p.column])[r];
          ok = ok && std::get<double>(p.lo) <= v && v <= std::get<double>(p.hi);
        }
      }
      if (!ok) continue;
      for (std::size_t i = 0; i < proj.size(); ++i) {
        std::visit([&](auto& dst) { dst.push_back(std::get<std::decay_t<decltype(dst)>>(t.columns[proj[i]])[r]); },
                   out.columns[i]);
      }
    }
    parts.push_back(std::move(out));
  }
  return lcf::concat(parts);
}

lcf::Table merge(const std::vector<ScanBatch>& batches, std::size_t ncols, const lcf::Schema& out_schema) {
  std::vector<lcf::Table> parts;
  for (const auto& b : batches) parts.push_back(b.table);
  if (parts.empty()) {
    lcf::Table empty;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (out_schema[c].type == ColumnType::kInt64) empty.columns.emplace_back(std::vector<std::int64_t>{});
      else empty.columns.emplace_back(std::vector<double>{});
    }
    return empty;
  }
  return lcf::concat(parts);
}

sim::CloudConfig steady_config() {
  sim::CloudConfig c;
  c.driver_network = c.driver_network.without_burst();
  c.faas.worker_ingress = c.faas.worker_ingress.without_burst();
  return c;
}

class ScanFixture : public ::testing::Test {
 protected:
  sim::Cloud cloud{steady_config()};
  lcf::Schema schema = test_schema();

  void SetUp() override { cloud.store().create_bucket("data"); }

  void put_file(const std::string& key, const std::vector<lcf::Table>& groups, std::uint32_t scale = 1) {
    const auto file = lcf::write_file(schema, groups);
    cloud.store().seed("data", key, file, lcf::file_scale(file, scale));
  }

  ScanReport run(std::vector<std::string> keys, PredicateSet preds, ScanConfig config, std::vector<ScanBatch>* out,
                 PlanLog* log = nullptr) {
    ScanReport report;
    std::vector<ScanBatch> sink_out;
    auto body = [&]() -> sim::Task<void> {
      ScanEnv env{cloud.store(), cloud.driver(), cloud.ledger().prices()};
      report = co_await execute_scan(env, "data", keys, preds, config, collect_into(sink_out), log);
    };
    auto h = cloud.sim().spawn(body());
    cloud.sim().run();
    if (h->error) std::rethrow_exception(h->error);
    if (out) *out = std::move(sink_out);
    return report;
  }
};

TEST(Prune, DisjointStatisticsArePruned) {
  const lcf::Schema s({{"day", ColumnType::kInt64}});
  const auto file = lcf::write_file(s, {lcf::Table{{std::vector<std::int64_t>{10, 20}}},
                                        lcf::Table{{std::vector<std::int64_t>{26, 40}}}});
  const auto footer = lcf::read_footer(file);
  EXPECT_EQ(prune_row_groups(footer, PredicateSet().where("day", 25, 30)), (std::vector<std::size_t>{1}));
  EXPECT_EQ(prune_row_groups(footer, PredicateSet().where("day", 20, 26)), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(prune_row_groups(footer, PredicateSet()), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(prune_row_groups(footer, PredicateSet().where("day", 21, 25)).empty());
  try {
    prune_row_groups(footer, PredicateSet().where("nope", 1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownColumn);
  }
  EXPECT_THROW(prune_row_groups(footer, PredicateSet().where("day", 1.0, 2.0)), Error);
  EXPECT_THROW(prune_row_groups(footer, PredicateSet().where("day", 3, 2)), Error);
}

TEST(Prune, SortedDataPrunesByGroupGranularity) {
  const auto groups = sorted_groups(1, 100'000, 100);
  const auto footer = lcf::read_footer(lcf::write_file(test_schema(), groups));
  ASSERT_EQ(footer.row_groups.size(), 100u);
  // day is uniform on [0, 1000): [400, 419] selects 2 % of the rows
  const auto narrow = prune_row_groups(footer, PredicateSet().where("day", 400, 419));
  EXPECT_LE(narrow.size(), 3u);
  EXPECT_GE(100 - narrow.size(), static_cast<std::size_t>(0.98 * 100) - 1);
  const auto wide = prune_row_groups(footer, PredicateSet().where("day", 10, 989));
  EXPECT_GE(wide.size(), 97u);
}

TEST(Plan, RowGroupPipeliningOnOneFile) {
  const auto groups = sorted_groups(2, 8000, 8);
  const auto file = lcf::write_file(test_schema(), groups);
  const auto footer = lcf::read_footer(file);
  ScanConfig cfg;
  std::vector<std::size_t> all(8);
  std::iota(all.begin(), all.end(), 0);
  const auto plan = plan_downloads(footer, file.size(), all, {0, 1, 2, 3}, cfg);
  EXPECT_EQ(plan.lanes, 2);
  EXPECT_EQ(plan.metadata_requests(), 1u);
  EXPECT_EQ(plan.data_requests(), 8u * 4u);
  for (const auto& r : plan.requests) {
    if (r.level == Level::kFiles) continue;
    EXPECT_EQ(r.level, Level::kRowGroups);
    EXPECT_GE(r.slot, 1);
    EXPECT_LE(r.slot, 4);
  }
  EXPECT_NE(plan.dump().find("L4 slot=0 footer"), std::string::npos);
}

TEST(Plan, SingleGroupUsesColumnChunks) {
  const auto groups = sorted_groups(3, 1000, 1);
  const auto file = lcf::write_file(test_schema(), groups);
  const auto footer = lcf::read_footer(file);
  const auto plan = plan_downloads(footer, file.size(), {0}, {0, 1, 2, 3}, ScanConfig{});
  EXPECT_EQ(plan.lanes, 1);
  std::vector<int> slots;
  for (const auto& r : plan.requests) {
    if (r.level == Level::kFiles) continue;
    EXPECT_EQ(r.level, Level::kColumnChunks);
    slots.push_back(r.slot);
  }
  std::sort(slots.begin(), slots.end());
  EXPECT_EQ(slots, (std::vector<int>{1, 2, 3, 4}));
}

TEST(Plan, IdleConnectionsSplitLargeChunks) {
  const auto groups = sorted_groups(4, 1000, 1);
  const auto file = lcf::write_file(test_schema(), groups);
  const auto footer = lcf::read_footer(file);
  const std::uint64_t len = footer.row_groups[0].columns[2].compressed_len;
  // 8000 stored bytes per chunk at scale 1024 are ~7.8 MiB logical
  ASSERT_EQ(len, 8000u);
  auto plan_for = [&](std::uint64_t chunk, std::vector<std::size_t> cols) {
    ScanConfig cfg;
    cfg.chunk_size_bytes = chunk;
    return plan_downloads(footer, file.size(), {0}, cols, cfg, UINT64_MAX, sim::Scale(1024));
  };
  // ceil(len / chunk_size) ranges when that fits the idle connections
  const auto two_mib = plan_for(2 << 20, {2});
  EXPECT_EQ(two_mib.data_requests(), (len * 1024 + (2 << 20) - 1) / (2 << 20));
  EXPECT_EQ(two_mib.data_bytes(), len);
  for (const auto& r : two_mib.requests) {
    if (r.level != Level::kFiles) {
      EXPECT_EQ(r.level, Level::kRange);
    }
  }
  // smaller chunk sizes never use more ranges than connections
  EXPECT_EQ(plan_for(1 << 20, {2}).data_requests(), 4u);
  EXPECT_EQ(plan_for(16 << 20, {2}).data_requests(), 1u);
  // two chunks share four connections
  EXPECT_EQ(plan_for(1 << 20, {1, 2}).data_requests(), 4u);
  // with as many chunks as connections nothing is split
  EXPECT_EQ(plan_for(1 << 20, {0, 1, 2, 3}).data_requests(), 4u);
}

TEST(Plan, RequestCountNonIncreasingInChunkSize) {
  const auto groups = sorted_groups(5, 4000, 3);
  const auto file = lcf::write_file(test_schema(), groups);
  const auto footer = lcf::read_footer(file);
  std::size_t prev = SIZE_MAX;
  for (std::uint64_t chunk : {64u << 10, 128u << 10, 1u << 20, 4u << 20, 16u << 20, 64u << 20}) {
    ScanConfig cfg;
    cfg.chunk_size_bytes = chunk;
    for (int conns : {1, 2, 4, 8}) {
      cfg.max_connections = conns;
      const auto plan = plan_downloads(footer, file.size(), {0, 1, 2}, {1}, cfg, UINT64_MAX, sim::Scale(4096));
      EXPECT_EQ(plan.data_bytes(), footer.row_groups[0].columns[1].compressed_len +
                                       footer.row_groups[1].columns[1].compressed_len +
                                       footer.row_groups[2].columns[1].compressed_len);
    }
    cfg.max_connections = 4;
    const auto n = plan_downloads(footer, file.size(), {0, 1, 2}, {1}, cfg, UINT64_MAX, sim::Scale(4096)).requests.size();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Plan, MemoryLimitsRowGroupsInFlight) {
  const auto groups = sorted_groups(6, 8000, 8);
  const auto file = lcf::write_file(test_schema(), groups);
  const auto footer = lcf::read_footer(file);
  const auto plan = plan_downloads(footer, file.size(), {0, 1, 2, 3}, {0, 1, 2, 3}, ScanConfig{}, 9000);
  EXPECT_EQ(plan.lanes, 1);
}

TEST_F(ScanFixture, FullScanEqualsFileContents) {
  const auto groups = sorted_groups(7, 5000, 5);
  put_file("a.lcf", groups);
  std::vector<ScanBatch> out;
  const auto report = run({"a.lcf"}, PredicateSet(), ScanConfig{}, &out);
  EXPECT_EQ(merge(out, 4, schema), lcf::concat(groups));
  EXPECT_EQ(report.rows_emitted, 5000u);
  EXPECT_EQ(report.requests, 1u + 5u * 4u);
  EXPECT_EQ(report.footer_requests, 1u);
}

TEST_F(ScanFixture, PruningIsSoundOnRandomPredicates) {
  std::mt19937_64 rng(8);
  const auto g1 = sorted_groups(9, 6000, 12);
  const auto g2 = sorted_groups(10, 3000, 3);
  put_file("a.lcf", g1);
  put_file("b.lcf", g2);
  std::vector<lcf::Table> all = g1;
  all.insert(all.end(), g2.begin(), g2.end());
  for (int trial = 0; trial < 40; ++trial) {
    PredicateSet preds;
    std::int64_t lo = static_cast<std::int64_t>(rng() % 1000), hi = static_cast<std::int64_t>(rng() % 1000);
    if (lo > hi) std::swap(lo, hi);
    preds.where("day", lo, hi);
    if (rng() % 2) preds.where("disc", 0.02, 0.06);
    if (rng() % 3 == 0) preds.where("qty", std::int64_t{1}, static_cast<std::int64_t>(1 + rng() % 50));
    const std::vector<std::string> proj = rng() % 2 ? std::vector<std::string>{"price", "qty"}
                                                    : std::vector<std::string>{"disc"};
    preds.project(proj);
    const auto out_schema = output_schema(schema, preds);

    ScanConfig cfg;
    cfg.max_connections = 1 + static_cast<int>(rng() % 6);
    std::vector<ScanBatch> pruned, full;
    const auto rp = run({"a.lcf", "b.lcf"}, preds, cfg, &pruned);
    cfg.prune = false;
    const auto rf = run({"a.lcf", "b.lcf"}, preds, cfg, &full);
    const auto want = oracle(all, preds, schema);
    EXPECT_EQ(merge(pruned, proj.size(), out_schema), want);
    EXPECT_EQ(merge(full, proj.size(), out_schema), want);
    EXPECT_LE(rp.requests, rf.requests);
    EXPECT_EQ(rp.rows_emitted, rf.rows_emitted);
  }
}

TEST_F(ScanFixture, ReportReconcilesWithLedger) {
  put_file("a.lcf", sorted_groups(11, 20000, 10), 64);
  const auto before = cloud.ledger().totals();
  PredicateSet preds;
  preds.where("day", 100, 349).project({"qty", "price"});
  const auto report = run({"a.lcf"}, preds, ScanConfig{}, nullptr);
  const auto delta = cloud.ledger().totals() - before;
  EXPECT_EQ(report.request_usd, delta.request_usd);
  EXPECT_EQ(report.requests, delta.reads);
  EXPECT_EQ(report.worker_usd, cloud.ledger().prices().per_mib_microsecond() *
                                   (cloud.driver().memory_mib() * report.duration.count()));
  EXPECT_EQ(report.row_groups, 10u);
  EXPECT_EQ(report.row_groups_scanned, 3u);
  EXPECT_EQ(cloud.driver().memory_in_use(), 0u);
}

TEST_F(ScanFixture, MoreConnectionsNeverSlower) {
  const std::vector<std::vector<std::string>> projections{{"price"}, {"qty", "price"}, {"day", "qty", "price", "disc"}};
  for (std::size_t groups : {1, 2, 6}) {
    const std::string key = "g" + std::to_string(groups);
    put_file(key, sorted_groups(12, 40000, groups), 256);
    for (const auto& proj : projections) {
      std::optional<sim::Duration> prev;
      for (int conns : {1, 2, 3, 4, 6, 8}) {
        ScanConfig cfg;
        cfg.max_connections = conns;
        const auto r = run({key}, PredicateSet().project(proj), cfg, nullptr);
        // transfers end on whole microseconds, so allow one per request
        if (prev) {
          EXPECT_LE(r.duration.count(), prev->count() + static_cast<std::int64_t>(r.requests))
              << groups << " groups, " << proj.size() << " columns, " << conns << " connections";
        }
        prev = r.duration;
      }
    }
  }
}

TEST_F(ScanFixture, FullyPrunedFilesOnlyReadFooters) {
  put_file("a.lcf", sorted_groups(13, 20000, 20), 1024);
  PredicateSet hit, miss;
  hit.where("day", 0, 999).project({"qty", "price", "disc"});
  miss.where("day", 5000, 6000).project({"qty", "price", "disc"});
  const auto fast = run({"a.lcf"}, miss, ScanConfig{}, nullptr);
  const auto slow = run({"a.lcf"}, hit, ScanConfig{}, nullptr);
  EXPECT_EQ(fast.requests, 1u);
  EXPECT_EQ(fast.rows_scanned, 0u);
  EXPECT_LT(sim::to_seconds(fast.duration), 0.2);
  EXPECT_GT(sim::to_seconds(slow.duration), 10 * sim::to_seconds(fast.duration));
}

TEST_F(ScanFixture, MetadataPrefetchOverlapsFooters) {
  for (int i = 0; i < 6; ++i) put_file("f" + std::to_string(i), sorted_groups(20 + i, 4000, 2), 512);
  std::vector<std::string> keys;
  for (int i = 0; i < 6; ++i) keys.push_back("f" + std::to_string(i));
  ScanConfig cfg;
  const auto eager = run(keys, PredicateSet(), cfg, nullptr);
  cfg.metadata_prefetch = false;
  const auto lazy = run(keys, PredicateSet(), cfg, nullptr);
  EXPECT_EQ(eager.requests, lazy.requests);
  EXPECT_LT(eager.duration, lazy.duration);
}

TEST_F(ScanFixture, CodecDecodeCostMakesScanCpuBound) {
  lcf::EncodingPolicy zlib;
  zlib.mode = lcf::EncodingPolicy::Mode::kCodec;
  const auto file = lcf::write_file(schema, sorted_groups(14, 20000, 4), zlib);
  cloud.store().seed("data", "z.lcf", file, lcf::file_scale(file, 256));
  ScanConfig cfg;
  const auto base = run({"z.lcf"}, PredicateSet(), cfg, nullptr);
  cfg.codec_decode_ns_per_byte = 50.0;
  const auto heavy = run({"z.lcf"}, PredicateSet(), cfg, nullptr);
  EXPECT_GT(heavy.duration, base.duration);
  EXPECT_EQ(heavy.rows_emitted, 20000u);
}

TEST_F(ScanFixture, CorruptChunkPropagates) {
  auto bytes = lcf::write_file(schema, sorted_groups(15, 1000, 1));
  auto footer = lcf::read_footer(bytes);
  // flip a byte inside the first RLE-free plain chunk so lengths still match but
  // point the footer's first chunk at RLE to force a bad run count
  footer.row_groups[0].columns[0].encoding = lcf::encoding::kRle;
  const auto fbytes = lcf::encode_footer(footer);
  const std::uint32_t len = lcf::parse_trailer(bytes, bytes.size());
  bytes.resize(bytes.size() - 8 - len);
  bytes.insert(bytes.end(), fbytes.begin(), fbytes.end());
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(fbytes.size() >> (8 * i)));
  bytes.insert(bytes.end(), {'L', 'C', 'F', '1'});
  cloud.store().seed("data", "bad.lcf", bytes);
  try {
    run({"bad.lcf"}, PredicateSet(), ScanConfig{}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCorruptChunk);
  }
}

TEST_F(ScanFixture, MissingFileIsNotFound) {
  try {
    run({"missing.lcf"}, PredicateSet(), ScanConfig{}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotFound);
  }
}

TEST(ScanReportCsv, HeaderMatchesRow) {
  ScanReport r;
  r.files = 1;
  const auto fields = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };
  EXPECT_EQ(fields(ScanReport::csv_header()), fields(r.csv_row()));
}

class DownloadFixture : public ::testing::Test {
 protected:
  sim::Cloud cloud{steady_config()};
  void SetUp() override {
    cloud.store().create_bucket("data");
    cloud.store().seed("data", "1g", sim::Bytes(1 << 20, 0x5a), 1024);  // 1 GiB logical
  }
  DownloadReport run(std::uint64_t chunk, int conns) {
    DownloadReport out;
    auto body = [&]() -> sim::Task<void> {
      out = co_await download_object({cloud.store(), cloud.driver(), cloud.ledger().prices()}, "data", "1g", chunk,
                                     conns);
    };
    cloud.sim().spawn(body());
    cloud.sim().run();
    return out;
  }
};

TEST_F(DownloadFixture, OneGibInOneMibChunks) {
  const auto r = run(1 << 20, 4);
  EXPECT_EQ(r.requests, 1024u);
  EXPECT_EQ(r.bytes, 1ull << 30);
  EXPECT_EQ(r.request_usd, sim::Usd::parse("0.0004096"));
  EXPECT_GE(r.mib_per_s(), 0.95 * 90);
}

TEST_F(DownloadFixture, SingleConnectionNeedsLargeChunks) {
  const auto big = run(16 << 20, 1);
  const auto small = run(1 << 20, 1);
  EXPECT_GE(big.mib_per_s(), 0.85 * 90);
  EXPECT_LT(small.mib_per_s(), 0.85 * 90);
}

}  // namespace
}  // namespace lambada::scan
