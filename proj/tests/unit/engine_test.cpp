#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "lambada/engine/driver.hpp"
#include "lambada/engine/fragment.hpp"
#include "lambada/engine/plan.hpp"
#include "lambada/lcf/reader.hpp"
#include "lambada/sim/error.hpp"

using namespace lambada;
using namespace lambada::engine;

namespace {

const lcf::Schema kIntSchema({{"k1", lcf::ColumnType::kInt64},
                              {"k2", lcf::ColumnType::kInt64},
                              {"v", lcf::ColumnType::kInt64},
                              {"d", lcf::ColumnType::kInt64},
                              {"f", lcf::ColumnType::kFloat64}});

struct Raw {
  std::vector<std::int64_t> k1, k2, v, d;
  std::vector<double> f;
};

lcf::Table slice(const Raw& r, std::size_t b, std::size_t e) {
  auto cut = [&](const auto& v) { return std::vector(v.begin() + b, v.begin() + e); };
  return {{cut(r.k1), cut(r.k2), cut(r.v), cut(r.d), cut(r.f)}};
}

// Writes `files` LCF objects of `rows` rows each to bucket "data"; returns the raw columns of all of them.
Raw make_dataset(sim::ObjectStore& store, std::size_t files, std::size_t rows, std::uint64_t seed,
                 std::vector<std::string>& keys, std::int64_t groups = 4) {
  std::mt19937_64 rng(seed);
  Raw all;
  if (!store.has_bucket("data")) store.create_bucket("data");
  for (std::size_t i = 0; i < files; ++i) {
    for (std::size_t r = 0; r < rows; ++r) {
      all.k1.push_back(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(groups)));
      all.k2.push_back(static_cast<std::int64_t>(rng() % 2));
      all.v.push_back(static_cast<std::int64_t>(rng() % 10000));
      all.d.push_back(static_cast<std::int64_t>(rng() % 11));
      all.f.push_back(static_cast<double>(rng() % 1000) / 1000.0);
    }
    auto table = slice(all, i * rows, (i + 1) * rows);
    auto file = lcf::write_file(kIntSchema, lcf::split_rows(table, std::max<std::size_t>(1, rows / 3)));
    keys.push_back("part-" + std::to_string(i) + ".lcf");
    store.seed("data", keys.back(), file);
  }
  return all;
}

sim::CloudConfig quick_config() {
  sim::CloudConfig c;
  c.faas.concurrency_limit = 10000;
  return c;
}

// Oracle for: where v < lim group by k1, k2: sum(v*d), count, min(v), max(d), avg(v).
QueryResult oracle_grouped(const Raw& r, std::int64_t lim) {
  struct Acc {
    std::int64_t sum = 0, count = 0, vmin = INT64_MAX, dmax = INT64_MIN, vsum = 0;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, Acc> m;
  for (std::size_t i = 0; i < r.v.size(); ++i) {
    if (r.v[i] >= lim) continue;
    auto& a = m[{r.k1[i], r.k2[i]}];
    a.sum += r.v[i] * r.d[i];
    a.count++;
    a.vmin = std::min(a.vmin, r.v[i]);
    a.dmax = std::max(a.dmax, r.d[i]);
    a.vsum += r.v[i];
  }
  QueryResult out;
  out.columns = {"k1", "k2", "revenue", "n", "vmin", "dmax", "vavg"};
  for (const auto& [k, a] : m)
    out.rows.push_back({k.first, k.second, a.sum, a.count, a.vmin, a.dmax,
                        static_cast<double>(a.vsum) / static_cast<double>(a.count)});
  return out;
}

Pipeline grouped_pipeline(const std::vector<std::string>& keys, std::int64_t lim) {
  auto p = Pipeline::from_lcf("data", keys);
  p.filter(Expr::col("v") < Value{lim})
      .aggregate({"k1", "k2"}, {{AggFunc::kSum, Expr::col("v") * Expr::col("d"), "revenue"},
                                {AggFunc::kCount, Expr::lit(1), "n"},
                                {AggFunc::kMin, Expr::col("v"), "vmin"},
                                {AggFunc::kMax, Expr::col("d"), "dmax"},
                                {AggFunc::kAvg, Expr::col("v"), "vavg"}});
  return p;
}

const lcf::Schema kFloatSchema({{"x0", lcf::ColumnType::kFloat64},
                                {"x1", lcf::ColumnType::kFloat64},
                                {"x2", lcf::ColumnType::kFloat64}});

}  // namespace

TEST(Expr, EvaluatesIntegerAndFloat) {
  lcf::Table t{{std::vector<std::int64_t>{1, 2, 3}, std::vector<std::int64_t>{10, 20, 30},
                std::vector<std::int64_t>{0, 0, 0}, std::vector<std::int64_t>{0, 0, 0},
                std::vector<double>{0.5, 1.5, 2.5}}};
  auto i = (Expr::col("k1") * Expr::col("k2") + Expr::lit(1)).eval(t, kIntSchema);
  EXPECT_EQ(std::get<std::vector<std::int64_t>>(i), (std::vector<std::int64_t>{11, 41, 91}));
  auto f = (Expr::col("k1") * Expr::col(std::size_t{4})).eval(t, kIntSchema);
  EXPECT_EQ(std::get<std::vector<double>>(f), (std::vector<double>{0.5, 3.0, 7.5}));
  EXPECT_EQ((Expr::col("k1") - Expr::lit(2)).type(kIntSchema), lcf::ColumnType::kInt64);
  EXPECT_EQ((Expr::col("k1") - Expr::lit(2.0)).type(kIntSchema), lcf::ColumnType::kFloat64);
}

TEST(Expr, IntegerArithmeticWraps) {
  lcf::Table t{{std::vector<std::int64_t>{INT64_MAX}, std::vector<std::int64_t>{1}, std::vector<std::int64_t>{0},
                std::vector<std::int64_t>{0}, std::vector<double>{0}}};
  auto v = (Expr::col("k1") + Expr::col("k2")).eval(t, kIntSchema);
  EXPECT_EQ(std::get<std::vector<std::int64_t>>(v)[0], INT64_MIN);
}

TEST(Expr, JsonRoundTrip) {
  Expr e = (Expr::col("a") + Expr::lit(2)) * (Expr::lit(1.5) - Expr::col(std::size_t{3}));
  Expr back = Expr::from_json(Json::parse(e.to_json().dump()));
  EXPECT_EQ(back.to_string(), e.to_string());
  EXPECT_EQ(e.to_string(), "((a + 2) * (1.5 - x[3]))");
  Comparison c = Expr::col("x") <= Value{0.25};
  EXPECT_EQ(Comparison::from_json(c.to_json()).to_string(), "x <= 0.25");
  EXPECT_THROW(Expr::from_json(Json{{"op", "/"}, {"l", Expr::lit(1).to_json()}, {"r", Expr::lit(1).to_json()}}),
               Error);
}

TEST(Expr, UnknownColumn) {
  EXPECT_THROW(Expr::col("nope").resolve(kIntSchema), Error);
  EXPECT_THROW(Expr::col(std::size_t{9}).resolve(kIntSchema), Error);
}

TEST(Expr, IntervalsOfBareColumns) {
  auto lt = as_interval(Expr::col("v") < 24, kIntSchema);
  ASSERT_TRUE(lt);
  EXPECT_EQ(std::get<std::int64_t>(lt->hi), 23);
  EXPECT_EQ(std::get<std::int64_t>(lt->lo), INT64_MIN);
  auto gt = as_interval(Expr::col("v") > 5, kIntSchema);
  EXPECT_EQ(std::get<std::int64_t>(gt->lo), 6);
  auto eq = as_interval(Expr::col(std::size_t{0}) == 3, kIntSchema);
  EXPECT_EQ(eq->column, "k1");
  EXPECT_EQ(std::get<std::int64_t>(eq->lo), 3);
  EXPECT_EQ(std::get<std::int64_t>(eq->hi), 3);
  auto ge = as_interval(Expr::col("f") >= Value{0.05}, kIntSchema);
  EXPECT_EQ(std::get<double>(ge->lo), 0.05);
  EXPECT_TRUE(std::isinf(std::get<double>(ge->hi)));
  auto flt = as_interval(Expr::col("f") < Value{0.5}, kIntSchema);
  EXPECT_LT(std::get<double>(flt->hi), 0.5);
  EXPECT_FALSE(as_interval((Expr::col("v") + Expr::lit(1)) < 3, kIntSchema));
  EXPECT_FALSE(as_interval(Expr::col("v") < Value{INT64_MIN}, kIntSchema));
  EXPECT_THROW(as_interval(Expr::col("v") < Value{2.5}, kIntSchema), Error);
}

TEST(Expr, ComparisonBitmapMatchesRowByRow) {
  std::mt19937_64 rng(3);
  Raw r;
  for (int i = 0; i < 200; ++i) {
    r.k1.push_back(static_cast<std::int64_t>(rng() % 7));
    r.k2.push_back(static_cast<std::int64_t>(rng() % 7));
    r.v.push_back(0);
    r.d.push_back(0);
    r.f.push_back(static_cast<double>(rng() % 100) / 10);
  }
  auto t = slice(r, 0, 200);
  std::vector<Comparison> conds{(Expr::col("k1") + Expr::col("k2")) >= 6, Expr::col("f") < Value{5.0}};
  auto bits = evaluate(conds, t, kIntSchema);
  for (std::size_t i = 0; i < 200; ++i) {
    bool expect = r.k1[i] + r.k2[i] >= 6 && r.f[i] < 5.0;
    EXPECT_EQ(((bits[i / 64] >> (i % 64)) & 1) != 0, expect) << i;
  }
}

TEST(Plan, ExampleQueryPushesFilterAndProjection) {
  auto plan = Pipeline::from_lcf("data", {"a.lcf", "b.lcf"})
                  .filter(Expr::col(std::size_t{1}) >= Value{0.05})
                  .map(Expr::col(std::size_t{1}) * Expr::col(std::size_t{2}))
                  .reduce({AggFunc::kSum, true})
                  .build(kFloatSchema);
  const auto& ops = plan.ops();
  ASSERT_EQ(ops.size(), 5u);
  std::vector<OpKind> kinds;
  for (const auto& op : ops) kinds.push_back(op.kind);
  EXPECT_EQ(kinds, (std::vector<OpKind>{OpKind::kScanFiles, OpKind::kMap, OpKind::kPartialAggregate,
                                        OpKind::kFinalAggregate, OpKind::kCollect}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ops[i].scope, Scope::kServerless);
  EXPECT_EQ(ops[3].scope, Scope::kDriver);
  EXPECT_EQ(ops[4].scope, Scope::kDriver);
  const auto& scan = plan.scan();
  ASSERT_EQ(scan.pushed.ranges().size(), 1u);
  EXPECT_EQ(scan.pushed.ranges()[0].column, "x1");
  EXPECT_EQ(std::get<double>(scan.pushed.ranges()[0].lo), 0.05);
  EXPECT_EQ(scan.pushed.projection(), (std::vector<std::string>{"x1", "x2"}));
  EXPECT_EQ(plan.aggregate()->aggs[0].func, AggFunc::kSum);
  EXPECT_NE(plan.pretty().find("[driver] FinalAggregate"), std::string::npos);
}

TEST(Plan, NoFilterProjectsUsedColumnsOnly) {
  auto plan = Pipeline::from_lcf("data", {"a"}).map(Expr::col("x2") + Expr::lit(1.0)).reduce({}).build(kFloatSchema);
  EXPECT_TRUE(plan.scan().pushed.ranges().empty());
  EXPECT_EQ(plan.scan().pushed.projection(), (std::vector<std::string>{"x2"}));
  auto count = Pipeline::from_lcf("data", {"a"}).aggregate({}, {{AggFunc::kCount, Expr::lit(1), "n"}}).build(kFloatSchema);
  EXPECT_EQ(count.scan().pushed.projection().size(), 1u);
}

TEST(Plan, NonAssociativeReduceRejected) {
  auto p = Pipeline::from_lcf("data", {"a"}).map(Expr::col("x0")).reduce({AggFunc::kSum, false});
  try {
    p.build(kFloatSchema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonAssociativeReduce);
  }
  EXPECT_THROW(Pipeline::from_lcf("data", {"a"}).reduce({AggFunc::kAvg, true}).build(kFloatSchema), Error);
}

TEST(Plan, GroupedAggregateBuildsWithoutExchange) {
  auto plan = grouped_pipeline({"a"}, 100).build(kIntSchema);
  EXPECT_EQ(plan.exchange(), nullptr);
  ASSERT_NE(plan.aggregate(), nullptr);
  EXPECT_EQ(plan.aggregate()->aggs.size(), 5u);
  EXPECT_EQ(plan.ops().size(), 4u);
  EXPECT_EQ(plan.ops()[2].scope, Scope::kDriver);
  EXPECT_EQ(plan.scan().pushed.projection(), (std::vector<std::string>{"k1", "k2", "v", "d"}));
}

TEST(Plan, ResidualFilterStaysServerless) {
  auto plan = Pipeline::from_lcf("data", {"a"})
                  .filter((Expr::col("v") + Expr::col("d")) > 3)
                  .filter(Expr::col("k1") == 1)
                  .aggregate({}, {{AggFunc::kCount, Expr::lit(1), "n"}})
                  .build(kIntSchema);
  EXPECT_EQ(plan.ops()[1].kind, OpKind::kFilter);
  EXPECT_EQ(plan.ops()[1].scope, Scope::kServerless);
  EXPECT_EQ(plan.scan().pushed.ranges().size(), 1u);
  EXPECT_EQ(plan.scan().pushed.projection(), (std::vector<std::string>{"v", "d"}));
}

TEST(Plan, ValidationRejectsBrokenChains) {
  auto good = grouped_pipeline({"a"}, 10).exchange({}).build(kIntSchema);
  auto ops = good.ops();
  EXPECT_NO_THROW(LogicalPlan{ops});
  auto bad = ops;
  for (auto& op : bad)
    if (op.kind == OpKind::kExchange) op.scope = Scope::kDriver;
  EXPECT_THROW(LogicalPlan{bad}, Error);
  bad = ops;
  bad.insert(bad.begin() + 1, Operator{});
  EXPECT_THROW(LogicalPlan{bad}, Error);
  bad = ops;
  bad.back().scope = Scope::kServerless;
  EXPECT_THROW(LogicalPlan{bad}, Error);
  bad = ops;
  bad.erase(bad.begin());
  EXPECT_THROW(LogicalPlan{bad}, Error);
  EXPECT_THROW(Pipeline::from_lcf("d", {"a"}).exchange({}).build(kIntSchema), Error);
}

TEST(Plan, FragmentRoundTrip) {
  auto plan = grouped_pipeline({"a", "b"}, 77).exchange({}).build(kIntSchema);
  PlanFragment f;
  f.query = 4;
  f.worker = 2;
  f.workers = 9;
  f.files = {"b"};
  f.pipeline = plan.serverless_json();
  f.result_queue = "q";
  f.spill_bucket = "s";
  f.scan.codec_decode_ns_per_byte = 3.5;
  auto back = PlanFragment::decode(f.encode());
  EXPECT_EQ(back.worker, 2u);
  EXPECT_EQ(back.files, f.files);
  EXPECT_EQ(back.scan.codec_decode_ns_per_byte, 3.5);
  auto rebuilt = back.plan();
  EXPECT_EQ(rebuilt.scan().keys, f.files);
  EXPECT_EQ(rebuilt.scan().pushed.ranges(), plan.scan().pushed.ranges());
  EXPECT_EQ(rebuilt.pretty().substr(rebuilt.pretty().find('\n')), plan.pretty().substr(plan.pretty().find('\n')));
  EXPECT_THROW(PlanFragment::decode(sim::Bytes{'{', 'x'}), Error);
}

TEST(Plan, FloatBoundsSurviveJson) {
  auto plan = Pipeline::from_lcf("data", {"a"}).filter(Expr::col("x0") >= Value{0.05}).map(Expr::col("x0")).reduce({}).build(kFloatSchema);
  auto back = LogicalPlan::from_serverless_json(Json::parse(plan.serverless_json().dump()), {"a"});
  EXPECT_EQ(back.scan().pushed.ranges(), plan.scan().pushed.ranges());
}

TEST(Aggregate, MergePartialsExamples) {
  EXPECT_EQ(merge_partials({5, 7, 0}), 12);
  std::vector<std::int64_t> v{3, -9, INT64_MAX, 4, INT64_MAX, 11};
  auto total = merge_partials(v);
  std::sort(v.begin(), v.end());
  do {
    EXPECT_EQ(merge_partials(v), total);
  } while (std::next_permutation(v.begin(), v.end()));
}

TEST(Aggregate, GroupMergeMatchesFlatRecompute) {
  std::mt19937_64 rng(11);
  Raw r;
  for (int i = 0; i < 3000; ++i) {
    r.k1.push_back(static_cast<std::int64_t>(rng() % 5));
    r.k2.push_back(static_cast<std::int64_t>(rng() % 2));
    r.v.push_back(static_cast<std::int64_t>(rng() % 1000));
    r.d.push_back(static_cast<std::int64_t>(rng() % 11));
    r.f.push_back(0);
  }
  auto aggs = grouped_pipeline({"a"}, 1 << 30).build(kIntSchema).aggregate()->aggs;
  // Overlapping keys: three partials over contiguous slices.
  std::vector<GroupTable> parts;
  for (int p = 0; p < 3; ++p) {
    parts.emplace_back(std::vector<std::string>{"k1", "k2"}, aggs, kIntSchema);
    parts.back().add(slice(r, static_cast<std::size_t>(p) * 1000, static_cast<std::size_t>(p + 1) * 1000));
  }
  auto expect = oracle_grouped(r, 1 << 30);
  std::vector<int> order{0, 1, 2};
  do {
    GroupTable m({"k1", "k2"}, aggs, kIntSchema);
    for (int i : order) m.merge_json(Json::parse(parts[static_cast<std::size_t>(i)].state_json().dump()));
    EXPECT_EQ(m.finalize(), expect);
  } while (std::next_permutation(order.begin(), order.end()));

  // Disjoint keys: merging is concatenation.
  GroupTable a({"k1", "k2"}, aggs, kIntSchema), b({"k1", "k2"}, aggs, kIntSchema);
  Raw lo, hi;
  for (std::size_t i = 0; i < r.k1.size(); ++i) {
    Raw& dst = r.k1[i] < 2 ? lo : hi;
    dst.k1.push_back(r.k1[i]);
    dst.k2.push_back(r.k2[i]);
    dst.v.push_back(r.v[i]);
    dst.d.push_back(r.d[i]);
    dst.f.push_back(0);
  }
  a.add(slice(lo, 0, lo.k1.size()));
  b.add(slice(hi, 0, hi.k1.size()));
  auto ra = a.finalize(), rb = b.finalize();
  a.merge(b);
  auto merged = a.finalize();
  auto cat = ra.rows;
  cat.insert(cat.end(), rb.rows.begin(), rb.rows.end());
  EXPECT_EQ(merged.rows, cat);
  EXPECT_EQ(merged, expect);
}

TEST(Aggregate, EmptyGlobalAggregateYieldsOneRow) {
  GroupTable g({}, {{AggFunc::kCount, Expr::lit(1), "n"}, {AggFunc::kSum, Expr::col("v"), "s"}}, kIntSchema);
  auto res = g.finalize();
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0][0], Value{std::int64_t{0}});
  EXPECT_EQ(res.rows[0][1], Value{std::int64_t{0}});
  EXPECT_THROW(GroupTable({"f"}, {}, kIntSchema), Error);
}

struct EngineCase {
  std::uint64_t files_per_worker;
  std::int64_t memory_mib;
  invoke::Strategy strategy;
};

class EngineMatrix : public ::testing::TestWithParam<EngineCase> {};

TEST_P(EngineMatrix, MatchesOracle) {
  const auto c = GetParam();
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  Raw raw = make_dataset(cloud.store(), 10, 600, 42, keys);
  sim::FunctionSpec spec;
  spec.memory_mib = c.memory_mib;
  Engine engine(cloud, spec);
  ExecOptions opts;
  opts.files_per_worker = c.files_per_worker;
  opts.strategy = c.strategy;
  auto out = engine.execute(grouped_pipeline(keys, 6000).build(kIntSchema), opts);
  EXPECT_EQ(out.result, oracle_grouped(raw, 6000));
  EXPECT_EQ(out.report.workers, (10 + c.files_per_worker - 1) / c.files_per_worker);
  EXPECT_EQ(out.report.rows_scanned, 6000u);
  EXPECT_GT(out.report.worker_usd(), sim::Usd{});
  EXPECT_GT(out.report.request_usd(), sim::Usd{});
}

INSTANTIATE_TEST_SUITE_P(Configs, EngineMatrix,
                         ::testing::Values(EngineCase{1, 1792, invoke::Strategy::kTwoLevel},
                                           EngineCase{2, 1792, invoke::Strategy::kDirect},
                                           EngineCase{3, 512, invoke::Strategy::kTwoLevel},
                                           EngineCase{10, 3008, invoke::Strategy::kDirect},
                                           EngineCase{4, 128, invoke::Strategy::kDirect}));

TEST(Engine, ExampleQueryMatchesOracle) {
  sim::Cloud cloud(quick_config());
  cloud.store().create_bucket("data");
  std::mt19937_64 rng(5);
  std::vector<std::string> keys;
  double expect = 0;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> x0, x1, x2;
    for (int r = 0; r < 500; ++r) {
      x0.push_back(static_cast<double>(rng() % 100));
      x1.push_back(static_cast<double>(rng() % 100) / 1000.0);
      x2.push_back(static_cast<double>(rng() % 8));
    }
    for (int r = 0; r < 500; ++r)
      if (x1[r] >= 0.05) expect += x1[r] * x2[r];
    keys.push_back("x" + std::to_string(i));
    cloud.store().seed("data", keys.back(), lcf::write_file(kFloatSchema, lcf::split_rows({{x0, x1, x2}}, 128)));
  }
  Engine engine(cloud);
  auto plan = Pipeline::from_lcf("data", keys)
                  .filter(Expr::col(std::size_t{1}) >= Value{0.05})
                  .map(Expr::col(std::size_t{1}) * Expr::col(std::size_t{2}))
                  .reduce({})
                  .build(kFloatSchema);
  auto out = engine.execute(plan, {});
  ASSERT_EQ(out.result.rows.size(), 1u);
  EXPECT_NEAR(std::get<double>(out.result.rows[0][0]), expect, 1e-9 * std::abs(expect));
}

TEST(Engine, ExchangePlanMatchesDriverMerge) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  Raw raw = make_dataset(cloud.store(), 9, 400, 8, keys, 200);
  Engine engine(cloud);
  for (const char* variant : {"1l", "2l", "2l-wc"}) {
    exchange::ExchangeConfig xc;
    auto v = exchange::ExchangeVariant::parse(variant);
    xc.levels = v.levels;
    xc.write_combining = v.write_combining;
    xc.naming.buckets = 2;
    auto plan = grouped_pipeline(keys, 9000).exchange(xc).build(kIntSchema);
    auto out = engine.execute(plan, {});
    EXPECT_EQ(out.result, oracle_grouped(raw, 9000)) << variant;
    EXPECT_GT(out.report.usage.writes, 9u) << variant;
    for (const auto& w : out.report.per_worker) EXPECT_GT(w.exchange.count(), 0) << variant;
  }
}

TEST(Engine, CorruptFileReportsWorker) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 6, 100, 1, keys);
  const auto size = *cloud.store().object_size("data", keys[4]);
  cloud.store().seed("data", keys[4], sim::Bytes(size, 0x11));
  Engine engine(cloud);
  try {
    engine.execute(grouped_pipeline(keys, 100).build(kIntSchema), {});
    FAIL() << "expected a worker error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kWorkerError);
    EXPECT_NE(std::string(e.what()).find("worker 4"), std::string::npos) << e.what();
  }
  // Workers report instead of dying: every invocation finished without an error of its own.
  for (const auto& rec : cloud.faas().records()) EXPECT_TRUE(rec.error.empty()) << rec.id;
}

TEST(Engine, OutOfMemoryIsReported) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 2, 3000, 1, keys);
  auto file = *cloud.store().peek("data", keys[1]);
  cloud.store().seed("data", keys[1], file, lcf::file_scale(file, 4096));
  sim::FunctionSpec spec;
  spec.memory_mib = 128;
  Engine engine(cloud, spec);
  try {
    engine.execute(grouped_pipeline(keys, 100).build(kIntSchema), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("worker 1: OutOfMemory"), std::string::npos) << e.what();
  }
}

TEST(Engine, LargeResultsSpillToStore) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  Raw raw = make_dataset(cloud.store(), 2, 50000, 9, keys);
  Engine engine(cloud);
  auto plan = Pipeline::from_lcf("data", keys).filter(Expr::col("d") >= 5).build(kIntSchema);
  auto out = engine.execute(plan, {});
  EXPECT_EQ(out.report.spilled, 2u);
  std::size_t expect = 0, row = 0;
  for (std::size_t i = 0; i < raw.d.size(); ++i) {
    if (raw.d[i] < 5) continue;
    ++expect;
    ASSERT_LT(row, out.result.rows.size());
    EXPECT_EQ(out.result.rows[row][2], Value{raw.v[i]});
    ++row;
  }
  EXPECT_EQ(out.result.rows.size(), expect);
  EXPECT_EQ(out.result.columns, (std::vector<std::string>{"k1", "k2", "v", "d", "f"}));
}

TEST(Engine, SmallResultsStayInline) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 3, 50, 9, keys);
  Engine engine(cloud);
  auto out = engine.execute(Pipeline::from_lcf("data", keys).filter(Expr::col("d") == 3).build(kIntSchema), {});
  EXPECT_EQ(out.report.spilled, 0u);
  EXPECT_TRUE(cloud.store().keys("lambada-results").empty());
}

TEST(Engine, LatencyReconstructsFromWorkerTrace) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 20, 300, 4, keys);
  Engine engine(cloud);
  auto out = engine.execute(grouped_pipeline(keys, 5000).build(kIntSchema), {});
  const auto& rep = out.report;
  sim::Duration last{0};
  for (const auto& w : rep.per_worker) {
    EXPECT_GE(w.started, w.initiated);
    EXPECT_GE(w.body_start, w.started);
    EXPECT_GE(w.received, w.posted);
    last = std::max(last, w.posted);
  }
  EXPECT_EQ(last, rep.last_posted);
  const auto& q = cloud.queues().config();
  const auto poll_time = rep.latency - last;
  EXPECT_GE(poll_time, q.send_latency);
  EXPECT_LE(poll_time, q.send_latency + q.poll_latency + sim::millis(1));
  EXPECT_EQ(rep.collect.count(), 0);
  EXPECT_NE(rep.csv_row().find(std::to_string(rep.workers)), std::string::npos);
  EXPECT_EQ(Json::parse(rep.to_json().dump()).at("workers"), 20);
  const auto csv = rep.workers_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
}

TEST(Engine, HotRunReusesContainers) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 12, 200, 4, keys);
  Engine engine(cloud);
  auto plan = grouped_pipeline(keys, 5000).build(kIntSchema);
  auto cold = engine.execute(plan, {});
  auto hot = engine.execute(plan, {});
  EXPECT_EQ(cold.result, hot.result);
  for (const auto& w : cold.report.per_worker) EXPECT_TRUE(w.cold);
  for (const auto& w : hot.report.per_worker) EXPECT_FALSE(w.cold);
  EXPECT_LT(hot.report.latency, cold.report.latency);
  EXPECT_NE(cold.report.query, hot.report.query);
}

TEST(Engine, StragglerBudgetTimesOut) {
  sim::Cloud cloud(quick_config());
  std::vector<std::string> keys;
  make_dataset(cloud.store(), 2, 100, 4, keys);
  Engine engine(cloud);
  ExecOptions opts;
  opts.result_timeout = sim::millis(5);
  try {
    engine.execute(grouped_pipeline(keys, 5000).build(kIntSchema), opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTimeout);
  }
}

TEST(Engine, RejectsEmptyInputs) {
  sim::Cloud cloud(quick_config());
  Engine engine(cloud);
  EXPECT_THROW(engine.execute(grouped_pipeline({}, 1).build(kIntSchema), {}), Error);
  ExecOptions zero;
  zero.files_per_worker = 0;
  EXPECT_THROW(engine.execute(grouped_pipeline({"a"}, 1).build(kIntSchema), zero), Error);
}
