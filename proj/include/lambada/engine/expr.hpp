#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lambada/lcf/format.hpp"
#include "lambada/scan/predicate.hpp"

namespace lambada::engine {

using Json = nlohmann::json;
using scan::Value;

/// Arithmetic over the columns of one row. Integer expressions stay integer
/// (two's complement wrap-around); any float operand makes the result float.
class Expr {
 public:
  enum class Kind { kColumn, kColumnIndex, kInt, kFloat, kAdd, kSub, kMul };

  static Expr col(std::string name);
  /// Positional reference, resolved against the input schema.
  static Expr col(std::size_t index);
  static Expr lit(std::int64_t v);
  static Expr lit(int v) { return lit(std::int64_t{v}); }
  static Expr lit(double v);

  friend Expr operator+(Expr a, Expr b) { return binary(Kind::kAdd, std::move(a), std::move(b)); }
  friend Expr operator-(Expr a, Expr b) { return binary(Kind::kSub, std::move(a), std::move(b)); }
  friend Expr operator*(Expr a, Expr b) { return binary(Kind::kMul, std::move(a), std::move(b)); }

  Kind kind() const noexcept { return kind_; }
  const std::string& column() const noexcept { return name_; }
  bool is_column() const noexcept { return kind_ == Kind::kColumn || kind_ == Kind::kColumnIndex; }

  /// Same expression with positional references replaced by names. Throws Error(kUnknownColumn).
  Expr resolve(const lcf::Schema& schema) const;
  /// Throws Error(kUnknownColumn).
  lcf::ColumnType type(const lcf::Schema& schema) const;
  void collect_columns(std::set<std::string>& out) const;
  /// Evaluates over every row of `table`, whose columns follow `schema`.
  lcf::Column eval(const lcf::Table& table, const lcf::Schema& schema) const;

  std::string to_string() const;
  Json to_json() const;
  /// Throws Error(kInvalidArgument).
  static Expr from_json(const Json& j);

 private:
  static Expr binary(Kind k, Expr a, Expr b);

  Kind kind_ = Kind::kInt;
  std::string name_;
  std::size_t index_ = 0;
  std::int64_t ival_ = 0;
  double fval_ = 0;
  std::shared_ptr<const Expr> lhs_, rhs_;
};

enum class CmpOp { kLt, kLe, kGt, kGe, kEq };

std::string_view cmp_name(CmpOp op);

/// lhs op constant.
struct Comparison {
  Expr lhs;
  CmpOp op = CmpOp::kEq;
  Value rhs;

  Comparison resolve(const lcf::Schema& schema) const { return {lhs.resolve(schema), op, rhs}; }
  std::string to_string() const;
  Json to_json() const;
  static Comparison from_json(const Json& j);
};

Comparison operator<(Expr e, Value v);
Comparison operator<=(Expr e, Value v);
Comparison operator>(Expr e, Value v);
Comparison operator>=(Expr e, Value v);
Comparison operator==(Expr e, Value v);
inline Comparison operator<(Expr e, int v) { return std::move(e) < Value{std::int64_t{v}}; }
inline Comparison operator<=(Expr e, int v) { return std::move(e) <= Value{std::int64_t{v}}; }
inline Comparison operator>(Expr e, int v) { return std::move(e) > Value{std::int64_t{v}}; }
inline Comparison operator>=(Expr e, int v) { return std::move(e) >= Value{std::int64_t{v}}; }
inline Comparison operator==(Expr e, int v) { return std::move(e) == Value{std::int64_t{v}}; }

/// The closed interval a comparison on a bare column stands for, or nullopt
/// when the left side is not a bare column or no integer satisfies it. Throws Error(kTypeMismatch) when a
/// float constant is compared with an integer column.
std::optional<scan::RangePredicate> as_interval(const Comparison& c, const lcf::Schema& schema);

/// Rows of `table` satisfying every comparison.
kernels::Bitmap evaluate(const std::vector<Comparison>& conditions, const lcf::Table& table, const lcf::Schema& schema);

Json value_to_json(const Value& v);
Value value_from_json(const Json& j);
std::string value_to_string(const Value& v);

}  // namespace lambada::engine
