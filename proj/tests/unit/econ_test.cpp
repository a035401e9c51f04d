#include <gtest/gtest.h>

#include <fstream>

#include "lambada/econ/econ.hpp"
#include "lambada/sim/error.hpp"

using namespace lambada;
using namespace lambada::econ;

TEST(JobScoped, SingleUnitIsStartupPlusScan) {
  auto vm = default_vm_profile();
  auto p = job_scoped_point(1e12, vm, 1);
  EXPECT_DOUBLE_EQ(p.latency_s, 120 + 1e12 / vm.bytes_per_s);
  EXPECT_DOUBLE_EQ(p.cost_usd, p.latency_s * vm.usd_per_s);
  EXPECT_THROW(job_scoped_point(1e12, vm, 0), Error);
}

TEST(JobScoped, LatencyFallsTowardStartup) {
  for (const auto& prof : {default_vm_profile(), default_faas_profile()}) {
    auto curve = job_scoped_curve(1e12, prof, doubling_units(1, 1 << 20));
    for (std::size_t i = 1; i < curve.size(); ++i) {
      EXPECT_LT(curve[i].latency_s, curve[i - 1].latency_s);
      EXPECT_GT(curve[i].latency_s, prof.startup_s);
    }
    EXPECT_NEAR(curve.back().latency_s, prof.asymptote_s(), 0.01 * prof.asymptote_s());
    // Cost eventually rises strictly: each doubling adds startup time of the new units.
    for (std::size_t i = 1; i < curve.size(); ++i) {
      if (curve[i].units >= 64) {
        EXPECT_GT(curve[i].cost_usd, curve[i - 1].cost_usd);
      }
    }
  }
  EXPECT_DOUBLE_EQ(default_faas_profile().asymptote_s(), 4.0);
  EXPECT_DOUBLE_EQ(default_vm_profile().asymptote_s(), 120.0);
}

TEST(JobScoped, VmCheapestIsAnOrderOfMagnitudeBelowFaas) {
  auto p = default_presets();
  auto vm = min_cost(job_scoped_curve(p.data_bytes, p.vm, doubling_units(p.vm.min_units, p.vm.max_units)));
  auto faas = min_cost(job_scoped_curve(p.data_bytes, p.faas, doubling_units(p.faas.min_units, p.faas.max_units)));
  EXPECT_LE(vm.cost_usd, faas.cost_usd / 10);
  // FaaS is the interactive option: its fastest point beats any VM point.
  auto fastest_faas = job_scoped_point(p.data_bytes, p.faas, p.faas.max_units);
  EXPECT_LT(fastest_faas.latency_s, p.vm.startup_s);
}

TEST(JobScoped, ParetoFrontIsMonotone) {
  auto faas = default_faas_profile();
  auto curve = job_scoped_curve(1e12, faas, doubling_units(8, 4096));
  auto front = pareto_front(curve);
  ASSERT_FALSE(front.empty());
  for (std::size_t i = 1; i < front.size(); ++i) {
    EXPECT_GT(front[i].latency_s, front[i - 1].latency_s);
    EXPECT_LT(front[i].cost_usd, front[i - 1].cost_usd);
  }
  for (const auto& p : curve) {
    bool dominated = false;
    for (const auto& f : front)
      dominated |= f.latency_s <= p.latency_s && f.cost_usd <= p.cost_usd;
    EXPECT_TRUE(dominated);
  }
}

TEST(JobScoped, CheapestMeetingTarget) {
  auto faas = default_faas_profile();
  auto p = cheapest_meeting(1e12, faas, 10);
  ASSERT_TRUE(p);
  EXPECT_LE(p->latency_s, 10);
  EXPECT_GT(job_scoped_point(1e12, faas, p->units - 1).latency_s, 10);
  EXPECT_FALSE(cheapest_meeting(1e12, faas, 3.9));
  EXPECT_FALSE(cheapest_meeting(1e12, default_vm_profile(), 10));
}

TEST(Crossover, LineIntersection) {
  std::vector<AlwaysOnConfig> vms{{"a", "x", 3, 2.5}, {"b", "y", 1, 7.0}};
  std::vector<PerUseService> svc{{"f", 0.5}, {"q", 4.0}};
  auto c = always_on_crossover(vms, svc);
  ASSERT_EQ(c.size(), 4u);
  for (const auto& x : c) {
    double hourly = x.always_on == "a" ? 7.5 : 7.0;
    double per = x.per_use == "f" ? 0.5 : 4.0;
    EXPECT_EQ(x.queries_per_hour, hourly / per);
  }
}

TEST(Crossover, FallsAsPerQueryCostRises) {
  std::vector<AlwaysOnConfig> vms{{"a", "x", 3, 3.024}};
  double prev = 1e300;
  for (double per : {0.01, 0.1, 0.5, 1.0, 4.5}) {
    double rate = always_on_crossover(vms, {{"s", per}})[0].queries_per_hour;
    EXPECT_LT(rate, prev);
    EXPECT_DOUBLE_EQ(rate * per, 9.072);
    prev = rate;
  }
}

TEST(Crossover, DegenerateInputs) {
  std::vector<AlwaysOnConfig> vms{{"a", "x", 1, 1.0}};
  try {
    always_on_crossover(vms, {{"free", 0.0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateInput);
  }
  EXPECT_THROW(always_on_crossover({}, {{"s", 1.0}}), Error);
}

TEST(QaaS, CountingRules) {
  std::vector<std::uint64_t> cols{1ULL << 40, 1ULL << 39};
  QaaSPricing full{5.0, CountingRule::kFullColumns};
  QaaSPricing rows{5.0, CountingRule::kSelectedRows};
  EXPECT_DOUBLE_EQ(qaas_query_cost(cols, 0.02, full), 7.5);
  EXPECT_DOUBLE_EQ(qaas_query_cost(cols, 0.02, rows), 7.5 * 0.02);
  EXPECT_DOUBLE_EQ(qaas_query_cost(cols, 1.0, rows), qaas_query_cost(cols, 1.0, full));
  EXPECT_EQ(qaas_query_cost(cols, 0.0, rows), 0.0);
  EXPECT_DOUBLE_EQ(qaas_query_cost({1ULL << 40}, 0.5, full), 5.0);
  EXPECT_THROW(qaas_query_cost(cols, 1.5, rows), Error);
  EXPECT_THROW(qaas_query_cost(cols, -0.1, rows), Error);
}

TEST(Presets, ShippedFileMatchesDefaults) {
  auto p = load_presets(LAMBADA_SOURCE_DIR "/config/econ.ini");
  auto d = default_presets();
  EXPECT_EQ(p.always_on.size(), 3u);
  EXPECT_EQ(p.always_on[0].count, 3u);
  EXPECT_EQ(p.always_on[1].count, 7u);
  EXPECT_EQ(p.always_on[2].count, 13u);
  EXPECT_NEAR(p.vm.bytes_per_s, d.vm.bytes_per_s, 1e-6 * d.vm.bytes_per_s);
  EXPECT_NEAR(p.faas.usd_per_s, d.faas.usd_per_s, 1e-12);
  EXPECT_EQ(p.vm.startup_s, 120);
  EXPECT_EQ(p.faas.startup_s, 4);
  auto svc = p.per_use();
  ASSERT_EQ(svc.size(), 2u);
  EXPECT_NEAR(svc[1].usd_per_query, 1e12 / (1024.0 * 1024 * 1024 * 1024) * 5, 1e-12);
}

TEST(Presets, RejectsBadConfig) {
  EXPECT_THROW(parse_presets("[vm]\nstartup_s = -1\n"), Error);
  EXPECT_THROW(parse_presets("[vm]\nbogus = 1\n"), Error);
  EXPECT_THROW(parse_presets("[nope]\nx = 1\n"), Error);
  EXPECT_THROW(parse_presets("[faas]\nusd_per_hour = 0\n"), Error);
  EXPECT_THROW(parse_presets("[qaas]\nrule = rows\n"), Error);
  auto p = parse_presets("[always_on:one]\ninstance = m5.large\ncount = 2\nusd_per_hour = 0.1\n");
  ASSERT_EQ(p.always_on.size(), 1u);
  EXPECT_DOUBLE_EQ(p.always_on[0].hourly_usd(), 0.2);
}

TEST(Presets, CsvShapes) {
  auto p = default_presets();
  auto js = job_scoped_csv(p);
  EXPECT_EQ(js.rfind("profile,units,latency_s,cost_usd\n", 0), 0u);
  EXPECT_EQ(std::count(js.begin(), js.end(), '\n'), 1 + 9 + 10);
  auto ao = always_on_csv(p, {1, 10, 100});
  EXPECT_EQ(std::count(ao.begin(), ao.end(), '\n'), 1 + 3 * 5);
  auto xo = crossover_csv(p);
  EXPECT_EQ(std::count(xo.begin(), xo.end(), '\n'), 1 + 6);
}
