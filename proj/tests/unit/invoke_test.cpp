#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "lambada/invoke/invocation.hpp"
#include "lambada/sim/cloud.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::invoke {
namespace {

sim::CloudConfig calibrated(double driver_rate = 250, double worker_rate = 80, std::int64_t latency_ms = 100) {
  sim::CloudConfig c;
  c.faas.invocation.driver_rate_per_s = driver_rate;
  c.faas.invocation.worker_rate_per_s = worker_rate;
  c.faas.invocation.driver_latency = sim::millis(latency_ms);
  c.faas.invocation.worker_latency = sim::millis(latency_ms);
  c.faas.concurrency_limit = 10'000;
  return c;
}

InvocationReport run(sim::Cloud& cloud, InvocationPlan plan) {
  InvocationReport report;
  auto h = cloud.sim().spawn([](sim::Cloud& c, InvocationPlan p, InvocationReport& out) -> sim::Task<void> {
    out = co_await run_plan(c.faas(), std::move(p));
  }(cloud, std::move(plan), report));
  cloud.sim().run();
  if (h->error) std::rethrow_exception(h->error);
  return report;
}

std::set<std::uint64_t> ids_of(const InvocationPlan& plan) {
  std::set<std::uint64_t> ids;
  for (const auto& a : plan.first_gen) {
    EXPECT_TRUE(ids.insert(a.self.id).second);
    for (const auto& c : a.children) EXPECT_TRUE(ids.insert(c.id).second);
  }
  return ids;
}

TEST(BuildPlan, FourThousandWorkersSplitEvenly) {
  const auto plan = build_plan(4096, Strategy::kTwoLevel);
  ASSERT_EQ(plan.first_gen.size(), 64u);
  for (const auto& a : plan.first_gen) EXPECT_EQ(a.children.size(), 63u);
  EXPECT_EQ(ids_of(plan).size(), 4096u);
}

TEST(BuildPlan, SingleWorkerIsDirect) {
  const auto plan = build_plan(1, Strategy::kTwoLevel);
  EXPECT_EQ(plan.strategy, Strategy::kDirect);
  ASSERT_EQ(plan.first_gen.size(), 1u);
  EXPECT_TRUE(plan.first_gen[0].children.empty());
}

TEST(BuildPlan, RaggedSplit) {
  const auto plan = build_plan(5, Strategy::kTwoLevel);
  ASSERT_EQ(plan.first_gen.size(), 3u);
  std::vector<std::size_t> sizes;
  for (const auto& a : plan.first_gen) sizes.push_back(a.children.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 1, 0}));
}

TEST(BuildPlan, EveryIdExactlyOnceWithBalancedLists) {
  for (std::uint64_t P = 1; P <= 300; ++P) {
    for (auto s : {Strategy::kDirect, Strategy::kTwoLevel}) {
      const auto plan = build_plan(P, s);
      const auto ids = ids_of(plan);
      ASSERT_EQ(ids.size(), P);
      EXPECT_EQ(*ids.rbegin(), P - 1);
      if (plan.strategy == Strategy::kTwoLevel) {
        const auto g = plan.first_gen.size();
        const auto rest = P - g;
        for (const auto& a : plan.first_gen) {
          EXPECT_GE(a.children.size(), rest / g);
          EXPECT_LE(a.children.size(), (rest + g - 1) / g);
        }
      }
    }
  }
}

TEST(BuildPlan, PayloadsFollowIds) {
  const auto plan = build_plan(10, Strategy::kTwoLevel, [](std::uint64_t id) {
    return sim::Bytes(id, static_cast<std::uint8_t>(id));
  });
  for (const auto& a : plan.first_gen) {
    EXPECT_EQ(a.self.payload.size(), a.self.id);
    for (const auto& c : a.children) EXPECT_EQ(c.payload, sim::Bytes(c.id, static_cast<std::uint8_t>(c.id)));
  }
}

TEST(RunPlan, TwoLevelStartsFourThousandWorkersWithinThreeSeconds) {
  sim::Cloud two(calibrated());
  const auto tree = run(two, build_plan(4096, Strategy::kTwoLevel));
  sim::Cloud one(calibrated());
  const auto direct = run(one, build_plan(4096, Strategy::kDirect));

  EXPECT_LE(sim::to_seconds(tree.last_initiated), 3.0);
  EXPECT_NEAR(sim::to_seconds(direct.last_initiated), 4096 / 250.0, 0.01);
  EXPECT_GE(sim::to_seconds(direct.last_initiated), 13.0);
  EXPECT_LE(sim::to_seconds(direct.last_initiated), 18.0);
  EXPECT_GE(direct.last_initiated.count(), 4 * tree.last_initiated.count());
}

TEST(RunPlan, EveryWorkerStartsExactlyOnce) {
  sim::Cloud cloud(calibrated());
  const auto r = run(cloud, build_plan(777, Strategy::kTwoLevel));
  ASSERT_EQ(r.workers.size(), 777u);
  std::set<std::uint64_t> ids;
  for (const auto& w : r.workers) ids.insert(w.worker);
  EXPECT_EQ(ids.size(), 777u);
  EXPECT_EQ(cloud.faas().records().size(), 777u);
}

TEST(RunPlan, MakespanLowerBound) {
  for (std::uint64_t P : {17, 100, 1000}) {
    sim::Cloud cloud(calibrated());
    const auto plan = build_plan(P, Strategy::kTwoLevel);
    std::size_t longest = 0;
    for (const auto& a : plan.first_gen) longest = std::max(longest, a.children.size());
    const auto r = run(cloud, plan);
    const double bound =
        static_cast<double>(plan.first_gen.size()) / 250.0 + 0.1 + static_cast<double>(longest) / 80.0;
    EXPECT_GE(sim::to_seconds(r.last_started), bound - 1e-6) << P;
  }
}

TEST(RunPlan, TreeBeatsDirectAndTheGapGrowsWithP) {
  double previous = 0;
  for (std::uint64_t P : {256, 1024, 4096}) {
    sim::Cloud a(calibrated()), b(calibrated());
    const double tree = sim::to_seconds(run(a, build_plan(P, Strategy::kTwoLevel)).last_started);
    const double direct = sim::to_seconds(run(b, build_plan(P, Strategy::kDirect)).last_started);
    EXPECT_LT(tree, direct) << P;
    EXPECT_GT(direct / tree, previous) << P;
    previous = direct / tree;
  }
}

TEST(RunPlan, PredictionMatchesWarmMeasurement) {
  sim::Cloud cloud(calibrated());
  Launcher launcher(cloud.faas(), "worker");
  launcher.register_function({}, [](sim::WorkerContext&, std::uint64_t, const sim::Bytes&) -> sim::Task<void> {
    co_return;
  });
  cloud.faas().prewarm("worker", 5000);
  const auto plan = build_plan(1000, Strategy::kTwoLevel);
  auto h = cloud.sim().spawn([](Launcher& l, InvocationPlan p) -> sim::Task<void> {
    co_await l.launch(std::move(p));
    co_await l.wait_all();
  }(launcher, plan));
  cloud.sim().run();
  ASSERT_FALSE(h->error);
  const auto predicted = predict_last_initiation(plan, calibrated().faas.invocation);
  EXPECT_NEAR(sim::to_seconds(launcher.report().last_initiated), sim::to_seconds(predicted), 0.002);
}

TEST(RunPlan, DirectThousandWorkersAcrossRegions) {
  for (const auto& region : sim::region_names()) {
    auto config = calibrated();
    config.faas.invocation = sim::region_preset(region);
    sim::Cloud cloud(config);
    const auto r = run(cloud, build_plan(1000, Strategy::kDirect));
    EXPECT_GE(sim::to_seconds(r.last_initiated), 3.3) << region;
    EXPECT_LE(sim::to_seconds(r.last_initiated), 4.6) << region;
  }
}

TEST(RunPlan, PhasesCsvHasOneRowPerFirstGeneration) {
  sim::Cloud cloud(calibrated());
  const auto r = run(cloud, build_plan(100, Strategy::kTwoLevel));
  const auto csv = r.phases_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
  for (const auto& w : r.workers) {
    if (w.generation == 1) {
      EXPECT_GT(w.children_done, w.started);
      EXPECT_GE(w.started - w.initiated, sim::millis(100));
    }
  }
}

TEST(RunPlan, RejectingOverTheConcurrencyLimit) {
  auto config = calibrated();
  config.faas.concurrency_limit = 50;
  config.faas.over_limit = sim::OverLimit::kReject;
  sim::Cloud cloud(config);
  Launcher launcher(cloud.faas(), "worker");
  launcher.register_function({}, [](sim::WorkerContext& ctx, std::uint64_t, const sim::Bytes&) -> sim::Task<void> {
    co_await ctx.node().sim().sleep_for(sim::millis(5000));
  });
  auto h = cloud.sim().spawn(launcher.launch(build_plan(100, Strategy::kDirect)));
  cloud.sim().run();
  ASSERT_TRUE(h->error);
  try {
    std::rethrow_exception(h->error);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConcurrencyLimitExceeded);
  }
}

TEST(RunPlan, WorkerBodyRunsAfterChildrenAreStarted) {
  sim::Cloud cloud(calibrated());
  Launcher launcher(cloud.faas(), "worker");
  std::vector<std::pair<std::uint64_t, sim::SimTime>> ran;
  launcher.register_function({}, [&](sim::WorkerContext& ctx, std::uint64_t id, const sim::Bytes& payload)
                                     -> sim::Task<void> {
    EXPECT_EQ(payload, sim::Bytes{static_cast<std::uint8_t>(id)});
    ran.emplace_back(id, ctx.node().sim().now());
    co_return;
  });
  auto h = cloud.sim().spawn([](Launcher& l) -> sim::Task<void> {
    co_await l.launch(build_plan(20, Strategy::kTwoLevel,
                                 [](std::uint64_t id) { return sim::Bytes{static_cast<std::uint8_t>(id)}; }));
    co_await l.wait_all();
  }(launcher));
  cloud.sim().run();
  ASSERT_FALSE(h->error);
  EXPECT_EQ(ran.size(), 20u);
  EXPECT_TRUE(launcher.failures().empty());
  const auto r = launcher.report();
  for (const auto& [id, at] : ran) {
    const auto& w = r.workers[id];
    if (w.generation == 1) {
      EXPECT_GE(at.time_since_epoch(), w.children_done) << id;
    }
  }
}

}  // namespace
}  // namespace lambada::invoke
