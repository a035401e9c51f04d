#include "lambada/bench/queries.hpp"

#include <map>

#include "lambada/sim/error.hpp"

namespace lambada::bench {

using engine::AggFunc;
using engine::Expr;
using engine::QueryResult;
using engine::Value;

namespace {

struct Columns {
  const std::vector<std::int64_t>& get(const lcf::Table& t, const char* name) const {
    return std::get<std::vector<std::int64_t>>(t.columns.at(lineitem_schema().require(name)));
  }
};

bool q1_row(std::int64_t ship) { return ship <= day::k1998_09_02; }

bool q6_row(std::int64_t ship, std::int64_t disc, std::int64_t qty) {
  return ship >= day::k1994_01_01 && ship < day::k1995_01_01 && disc >= 5 && disc <= 7 && qty < 24;
}

}  // namespace

std::string_view query_name(Query q) { return q == Query::kQ1 ? "q1" : "q6"; }

Query parse_query(std::string_view name) {
  if (name == "q1") return Query::kQ1;
  if (name == "q6") return Query::kQ6;
  throw Error(ErrorKind::kConfigError, "unknown query '" + std::string(name) + "' (q1|q6)");
}

engine::Pipeline q1_pipeline(const Dataset& data) {
  auto price = Expr::col("extendedprice");
  auto disc_price = price * (Expr::lit(100) - Expr::col("discount"));
  auto p = engine::Pipeline::from_lcf(data.bucket, data.keys);
  p.filter(Expr::col("shipdate") <= Value{day::k1998_09_02})
      .aggregate({"returnflag", "linestatus"},
                 {{AggFunc::kSum, Expr::col("quantity"), "sum_qty"},
                  {AggFunc::kSum, price, "sum_base_price"},
                  {AggFunc::kSum, disc_price, "sum_disc_price"},
                  {AggFunc::kSum, disc_price * (Expr::lit(100) + Expr::col("tax")), "sum_charge"},
                  {AggFunc::kAvg, Expr::col("quantity"), "avg_qty"},
                  {AggFunc::kAvg, price, "avg_price"},
                  {AggFunc::kAvg, Expr::col("discount"), "avg_disc"},
                  {AggFunc::kCount, Expr::lit(1), "count_order"}});
  return p;
}

engine::Pipeline q6_pipeline(const Dataset& data) {
  auto p = engine::Pipeline::from_lcf(data.bucket, data.keys);
  p.filter(Expr::col("shipdate") >= Value{day::k1994_01_01})
      .filter(Expr::col("shipdate") < Value{day::k1995_01_01})
      .filter(Expr::col("discount") >= 5)
      .filter(Expr::col("discount") <= 7)
      .filter(Expr::col("quantity") < 24)
      .aggregate({}, {{AggFunc::kSum, Expr::col("extendedprice") * Expr::col("discount"), "revenue"}});
  return p;
}

engine::LogicalPlan query_plan(Query q, const Dataset& data) {
  return (q == Query::kQ1 ? q1_pipeline(data) : q6_pipeline(data)).build(lineitem_schema());
}

std::vector<std::string> query_columns(Query q) {
  if (q == Query::kQ1)
    return {"quantity", "extendedprice", "discount", "tax", "returnflag", "linestatus", "shipdate"};
  return {"quantity", "extendedprice", "discount", "shipdate"};
}

QueryResult q1_oracle(const std::vector<lcf::Table>& tables) {
  struct Acc {
    std::int64_t qty = 0, base = 0, disc_price = 0, charge = 0, disc = 0, count = 0;
  };
  std::map<std::pair<std::int64_t, std::int64_t>, Acc> groups;
  Columns c;
  for (const auto& t : tables) {
    const auto& ship = c.get(t, "shipdate");
    const auto& qty = c.get(t, "quantity");
    const auto& price = c.get(t, "extendedprice");
    const auto& disc = c.get(t, "discount");
    const auto& tax = c.get(t, "tax");
    const auto& flag = c.get(t, "returnflag");
    const auto& status = c.get(t, "linestatus");
    for (std::size_t r = 0; r < ship.size(); ++r) {
      if (!q1_row(ship[r])) continue;
      Acc& a = groups[{flag[r], status[r]}];
      a.qty += qty[r];
      a.base += price[r];
      a.disc_price += price[r] * (100 - disc[r]);
      a.charge += price[r] * (100 - disc[r]) * (100 + tax[r]);
      a.disc += disc[r];
      a.count += 1;
    }
  }
  QueryResult out;
  out.columns = {"returnflag", "linestatus", "sum_qty", "sum_base_price", "sum_disc_price", "sum_charge",
                 "avg_qty", "avg_price", "avg_disc", "count_order"};
  for (const auto& [k, a] : groups) {
    const double n = static_cast<double>(a.count);
    out.rows.push_back({k.first, k.second, a.qty, a.base, a.disc_price, a.charge, static_cast<double>(a.qty) / n,
                        static_cast<double>(a.base) / n, static_cast<double>(a.disc) / n, a.count});
  }
  return out;
}

QueryResult q6_oracle(const std::vector<lcf::Table>& tables) {
  std::int64_t revenue = 0;
  Columns c;
  for (const auto& t : tables) {
    const auto& ship = c.get(t, "shipdate");
    const auto& qty = c.get(t, "quantity");
    const auto& price = c.get(t, "extendedprice");
    const auto& disc = c.get(t, "discount");
    for (std::size_t r = 0; r < ship.size(); ++r)
      if (q6_row(ship[r], disc[r], qty[r])) revenue += price[r] * disc[r];
  }
  return {{"revenue"}, {{Value{revenue}}}};
}

QueryResult oracle(Query q, const std::vector<lcf::Table>& tables) {
  return q == Query::kQ1 ? q1_oracle(tables) : q6_oracle(tables);
}

double selectivity(Query q, const std::vector<lcf::Table>& tables) {
  std::uint64_t rows = 0, hits = 0;
  Columns c;
  for (const auto& t : tables) {
    const auto& ship = c.get(t, "shipdate");
    const auto& qty = c.get(t, "quantity");
    const auto& disc = c.get(t, "discount");
    for (std::size_t r = 0; r < ship.size(); ++r) {
      ++rows;
      hits += q == Query::kQ1 ? q1_row(ship[r]) : q6_row(ship[r], disc[r], qty[r]);
    }
  }
  return rows ? static_cast<double>(hits) / static_cast<double>(rows) : 0.0;
}

}  // namespace lambada::bench
