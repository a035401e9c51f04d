#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lambada/engine/expr.hpp"

namespace lambada::engine {

enum class AggFunc { kSum, kCount, kMin, kMax, kAvg };

std::string_view agg_name(AggFunc f);
/// Throws Error(kInvalidArgument).
AggFunc parse_agg(std::string_view name);

struct AggSpec {
  AggFunc func = AggFunc::kSum;
  Expr arg = Expr::lit(std::int64_t{1});  // ignored by count
  std::string name;

  Json to_json() const;
  static AggSpec from_json(const Json& j);
};

/// Running state of one aggregate within one group. Integer sums wrap modulo
/// 2^64, so merging is exact in any order; float sums are order-dependent.
struct AggState {
  std::int64_t count = 0;
  std::int64_t isum = 0;
  double fsum = 0;
  Value min;
  Value max;

  bool operator==(const AggState&) const = default;
};

/// Final rows: key columns followed by aggregate columns, rows sorted by key.
struct QueryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  std::string to_csv() const;
  Json to_json() const;
  bool operator==(const QueryResult&) const = default;
};

/// Grouped aggregation keyed by integer columns. Used both for a worker's
/// partial aggregate and the final merge.
class GroupTable {
 public:
  GroupTable() = default;
  /// Throws Error(kTypeMismatch) when a key column is not INT64.
  GroupTable(std::vector<std::string> keys, std::vector<AggSpec> aggs, const lcf::Schema& input);

  /// Folds every row of `table` (laid out per the input schema) into the groups.
  void add(const lcf::Table& table);
  /// Folds another partial aggregate of the same shape into this one.
  void merge(const GroupTable& other);

  std::size_t groups() const noexcept { return groups_.size(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<AggSpec>& aggs() const noexcept { return aggs_; }
  const std::map<std::vector<std::int64_t>, std::vector<AggState>>& states() const noexcept { return groups_; }

  /// Partial state as an array of per-group entries; the expressions travel
  /// with the plan.
  Json state_json() const;
  static Json entry_json(const std::vector<std::int64_t>& key, const std::vector<AggState>& states);
  /// Folds an array of entries in. Throws Error(kInvalidArgument) on a shape mismatch.
  void merge_json(const Json& state);

  QueryResult finalize() const;

 private:
  std::vector<std::string> keys_;
  std::vector<AggSpec> aggs_;
  std::vector<lcf::ColumnType> arg_types_;
  lcf::Schema input_;
  std::map<std::vector<std::int64_t>, std::vector<AggState>> groups_;
};

/// Order-independent fold of partial integer sums.
std::int64_t merge_partials(const std::vector<std::int64_t>& partials);

}  // namespace lambada::engine
