#pragma once

#include <string_view>
#include <vector>

#include "lambada/bench/lineitem.hpp"
#include "lambada/engine/plan.hpp"

namespace lambada::bench {

enum class Query { kQ1, kQ6 };

std::string_view query_name(Query q);
/// "q1" or "q6"; throws Error(kConfigError).
Query parse_query(std::string_view name);

/// Pricing summary report: shipdate <= 1998-09-02, grouped by returnflag and
/// linestatus, with the sums, averages and count of the pricing columns.
engine::Pipeline q1_pipeline(const Dataset& data);
/// Forecasting revenue change: sum(extendedprice * discount) over one
/// shipdate year, discount 5..7 and quantity < 24.
engine::Pipeline q6_pipeline(const Dataset& data);
engine::LogicalPlan query_plan(Query q, const Dataset& data);

/// Columns a query reads.
std::vector<std::string> query_columns(Query q);

/// Row-at-a-time reference evaluation over decoded tables.
engine::QueryResult q1_oracle(const std::vector<lcf::Table>& tables);
engine::QueryResult q6_oracle(const std::vector<lcf::Table>& tables);
engine::QueryResult oracle(Query q, const std::vector<lcf::Table>& tables);

/// Fraction of rows passing the query's filter.
double selectivity(Query q, const std::vector<lcf::Table>& tables);

}  // namespace lambada::bench
