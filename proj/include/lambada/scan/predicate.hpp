#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "lambada/kernels/kernels.hpp"
#include "lambada/lcf/format.hpp"

namespace lambada::scan {

using Value = std::variant<std::int64_t, double>;

/// Closed interval [lo, hi] on one column. Both bounds share the column's type.
struct RangePredicate {
  std::string column;
  Value lo;
  Value hi;

  bool operator==(const RangePredicate&) const = default;
};

/// A predicate resolved against a schema.
struct BoundPredicate {
  std::size_t column = 0;
  lcf::ColumnType type = lcf::ColumnType::kInt64;
  Value lo;
  Value hi;
};

/// Conjunctive range predicates plus a projection.
class PredicateSet {
 public:
  PredicateSet& where(std::string column, std::int64_t lo, std::int64_t hi);
  PredicateSet& where(std::string column, double lo, double hi);
  PredicateSet& where(std::string column, int lo, int hi) {
    return where(std::move(column), std::int64_t{lo}, std::int64_t{hi});
  }
  /// Output columns, in order. Empty means every column of the file.
  PredicateSet& project(std::vector<std::string> columns);

  const std::vector<RangePredicate>& ranges() const noexcept { return ranges_; }
  const std::vector<std::string>& projection() const noexcept { return projection_; }
  bool empty() const noexcept { return ranges_.empty(); }

  /// Throws Error(kUnknownColumn), Error(kTypeMismatch) when a bound's type
  /// differs from the column's, or Error(kInvalidArgument) when lo > hi.
  std::vector<BoundPredicate> bind(const lcf::Schema& schema) const;
  /// Column indices of the projection; throws Error(kUnknownColumn).
  std::vector<std::size_t> bind_projection(const lcf::Schema& schema) const;

  /// "col in [lo, hi] and ...", or "true".
  std::string describe() const;

 private:
  std::vector<RangePredicate> ranges_;
  std::vector<std::string> projection_;
};

/// Indices of row groups whose statistics intersect every predicate.
std::vector<std::size_t> prune_row_groups(const lcf::FileFooter& footer, const std::vector<BoundPredicate>& preds);
std::vector<std::size_t> prune_row_groups(const lcf::FileFooter& footer, const PredicateSet& preds);

/// Selection bitmap of the rows of `table` satisfying every predicate.
/// `table` holds the file's full column list (unloaded columns may be empty).
kernels::Bitmap filter_rows(const lcf::Table& table, std::size_t rows, const std::vector<BoundPredicate>& preds);

/// Rows whose selection bit is set, restricted to `columns`.
lcf::Table gather(const lcf::Table& table, const std::vector<std::size_t>& columns, const kernels::Bitmap& selection,
                  std::size_t rows);

}  // namespace lambada::scan
