#include "lambada/engine/expr.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

std::string_view op_symbol(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::kAdd: return "+";
    case Expr::Kind::kSub: return "-";
    case Expr::Kind::kMul: return "*";
    default: return "?";
  }
}

std::int64_t wrap(Expr::Kind k, std::int64_t a, std::int64_t b) {
  auto ua = static_cast<std::uint64_t>(a);
  auto ub = static_cast<std::uint64_t>(b);
  switch (k) {
    case Expr::Kind::kAdd: return static_cast<std::int64_t>(ua + ub);
    case Expr::Kind::kSub: return static_cast<std::int64_t>(ua - ub);
    default: return static_cast<std::int64_t>(ua * ub);
  }
}

double apply(Expr::Kind k, double a, double b) {
  switch (k) {
    case Expr::Kind::kAdd: return a + b;
    case Expr::Kind::kSub: return a - b;
    default: return a * b;
  }
}

std::vector<double> as_doubles(lcf::Column c) {
  if (auto* d = std::get_if<std::vector<double>>(&c)) return std::move(*d);
  const auto& i = std::get<std::vector<std::int64_t>>(c);
  return {i.begin(), i.end()};
}

bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
double to_double(const Value& v) {
  return is_int(v) ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
}

template <typename T>
bool compare(T a, CmpOp op, T b) {
  switch (op) {
    case CmpOp::kLt: return a < b;
    case CmpOp::kLe: return a <= b;
    case CmpOp::kGt: return a > b;
    case CmpOp::kGe: return a >= b;
    case CmpOp::kEq: return a == b;
  }
  return false;
}

}  // namespace

Expr Expr::col(std::string name) {
  Expr e;
  e.kind_ = Kind::kColumn;
  e.name_ = std::move(name);
  return e;
}

Expr Expr::col(std::size_t index) {
  Expr e;
  e.kind_ = Kind::kColumnIndex;
  e.index_ = index;
  return e;
}

Expr Expr::lit(std::int64_t v) {
  Expr e;
  e.kind_ = Kind::kInt;
  e.ival_ = v;
  return e;
}

Expr Expr::lit(double v) {
  Expr e;
  e.kind_ = Kind::kFloat;
  e.fval_ = v;
  return e;
}

Expr Expr::binary(Kind k, Expr a, Expr b) {
  Expr e;
  e.kind_ = k;
  e.lhs_ = std::make_shared<const Expr>(std::move(a));
  e.rhs_ = std::make_shared<const Expr>(std::move(b));
  return e;
}

Expr Expr::resolve(const lcf::Schema& schema) const {
  switch (kind_) {
    case Kind::kColumnIndex:
      if (index_ >= schema.size())
        throw Error(ErrorKind::kUnknownColumn, fmt::format("column #{} of {}", index_, schema.size()));
      return col(schema[index_].name);
    case Kind::kColumn:
      schema.require(name_);
      return *this;
    case Kind::kInt:
    case Kind::kFloat: return *this;
    default: return binary(kind_, lhs_->resolve(schema), rhs_->resolve(schema));
  }
}

lcf::ColumnType Expr::type(const lcf::Schema& schema) const {
  switch (kind_) {
    case Kind::kColumn: return schema[schema.require(name_)].type;
    case Kind::kColumnIndex: return resolve(schema).type(schema);
    case Kind::kInt: return lcf::ColumnType::kInt64;
    case Kind::kFloat: return lcf::ColumnType::kFloat64;
    default:
      return lhs_->type(schema) == lcf::ColumnType::kInt64 && rhs_->type(schema) == lcf::ColumnType::kInt64
                 ? lcf::ColumnType::kInt64
                 : lcf::ColumnType::kFloat64;
  }
}

void Expr::collect_columns(std::set<std::string>& out) const {
  if (kind_ == Kind::kColumn) out.insert(name_);
  if (lhs_) lhs_->collect_columns(out);
  if (rhs_) rhs_->collect_columns(out);
}

lcf::Column Expr::eval(const lcf::Table& table, const lcf::Schema& schema) const {
  const std::size_t rows = table.rows();
  switch (kind_) {
    case Kind::kColumn: return table.columns.at(schema.require(name_));
    case Kind::kColumnIndex: return resolve(schema).eval(table, schema);
    case Kind::kInt: return std::vector<std::int64_t>(rows, ival_);
    case Kind::kFloat: return std::vector<double>(rows, fval_);
    default: break;
  }
  lcf::Column a = lhs_->eval(table, schema);
  lcf::Column b = rhs_->eval(table, schema);
  if (lcf::column_type(a) == lcf::ColumnType::kInt64 && lcf::column_type(b) == lcf::ColumnType::kInt64) {
    auto& x = std::get<std::vector<std::int64_t>>(a);
    const auto& y = std::get<std::vector<std::int64_t>>(b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = wrap(kind_, x[i], y[i]);
    return a;
  }
  auto x = as_doubles(std::move(a));
  auto y = as_doubles(std::move(b));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = apply(kind_, x[i], y[i]);
  return x;
}

std::string Expr::to_string() const {
  switch (kind_) {
    case Kind::kColumn: return name_;
    case Kind::kColumnIndex: return fmt::format("x[{}]", index_);
    case Kind::kInt: return std::to_string(ival_);
    case Kind::kFloat: return fmt::format("{}", fval_);
    default: return fmt::format("({} {} {})", lhs_->to_string(), op_symbol(kind_), rhs_->to_string());
  }
}

Json Expr::to_json() const {
  switch (kind_) {
    case Kind::kColumn: return {{"col", name_}};
    case Kind::kColumnIndex: return {{"idx", index_}};
    case Kind::kInt: return {{"int", ival_}};
    case Kind::kFloat: return {{"float", fval_}};
    default: return {{"op", std::string(op_symbol(kind_))}, {"l", lhs_->to_json()}, {"r", rhs_->to_json()}};
  }
}

Expr Expr::from_json(const Json& j) {
  try {
    if (j.contains("col")) return col(j.at("col").get<std::string>());
    if (j.contains("idx")) return col(j.at("idx").get<std::size_t>());
    if (j.contains("int")) return lit(j.at("int").get<std::int64_t>());
    if (j.contains("float")) return lit(j.at("float").get<double>());
    auto op = j.at("op").get<std::string>();
    Kind k = op == "+" ? Kind::kAdd : op == "-" ? Kind::kSub : op == "*" ? Kind::kMul : Kind::kInt;
    if (k == Kind::kInt) throw Error(ErrorKind::kInvalidArgument, "unknown operator " + op);
    return binary(k, from_json(j.at("l")), from_json(j.at("r")));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed expression: ") + e.what());
  }
}

std::string_view cmp_name(CmpOp op) {
  switch (op) {
    case CmpOp::kLt: return "<";
    case CmpOp::kLe: return "<=";
    case CmpOp::kGt: return ">";
    case CmpOp::kGe: return ">=";
    case CmpOp::kEq: return "==";
  }
  return "?";
}

std::string Comparison::to_string() const {
  return fmt::format("{} {} {}", lhs.to_string(), cmp_name(op), value_to_string(rhs));
}

Json Comparison::to_json() const {
  return {{"lhs", lhs.to_json()}, {"op", std::string(cmp_name(op))}, {"rhs", value_to_json(rhs)}};
}

Comparison Comparison::from_json(const Json& j) {
  try {
    auto name = j.at("op").get<std::string>();
    CmpOp op;
    if (name == "<") op = CmpOp::kLt;
    else if (name == "<=") op = CmpOp::kLe;
    else if (name == ">") op = CmpOp::kGt;
    else if (name == ">=") op = CmpOp::kGe;
    else if (name == "==") op = CmpOp::kEq;
    else throw Error(ErrorKind::kInvalidArgument, "unknown comparison " + name);
    return {Expr::from_json(j.at("lhs")), op, value_from_json(j.at("rhs"))};
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed comparison: ") + e.what());
  }
}

Comparison operator<(Expr e, Value v) { return {std::move(e), CmpOp::kLt, v}; }
Comparison operator<=(Expr e, Value v) { return {std::move(e), CmpOp::kLe, v}; }
Comparison operator>(Expr e, Value v) { return {std::move(e), CmpOp::kGt, v}; }
Comparison operator>=(Expr e, Value v) { return {std::move(e), CmpOp::kGe, v}; }
Comparison operator==(Expr e, Value v) { return {std::move(e), CmpOp::kEq, v}; }

std::optional<scan::RangePredicate> as_interval(const Comparison& c, const lcf::Schema& schema) {
  if (!c.lhs.is_column()) return std::nullopt;
  Expr column = c.lhs.resolve(schema);
  const auto& name = column.column();
  if (schema[schema.require(name)].type == lcf::ColumnType::kInt64) {
    if (!is_int(c.rhs))
      throw Error(ErrorKind::kTypeMismatch, fmt::format("{} compares an integer column with a float", c.to_string()));
    constexpr auto lo = std::numeric_limits<std::int64_t>::min();
    constexpr auto hi = std::numeric_limits<std::int64_t>::max();
    std::int64_t v = std::get<std::int64_t>(c.rhs);
    switch (c.op) {
      case CmpOp::kLt:
        if (v == lo) return std::nullopt;
        return scan::RangePredicate{name, Value{lo}, Value{v - 1}};
      case CmpOp::kLe: return scan::RangePredicate{name, Value{lo}, Value{v}};
      case CmpOp::kGt:
        if (v == hi) return std::nullopt;
        return scan::RangePredicate{name, Value{v + 1}, Value{hi}};
      case CmpOp::kGe: return scan::RangePredicate{name, Value{v}, Value{hi}};
      case CmpOp::kEq: return scan::RangePredicate{name, Value{v}, Value{v}};
    }
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  double v = to_double(c.rhs);
  switch (c.op) {
    case CmpOp::kLt: return scan::RangePredicate{name, Value{-inf}, Value{std::nextafter(v, -inf)}};
    case CmpOp::kLe: return scan::RangePredicate{name, Value{-inf}, Value{v}};
    case CmpOp::kGt: return scan::RangePredicate{name, Value{std::nextafter(v, inf)}, Value{inf}};
    case CmpOp::kGe: return scan::RangePredicate{name, Value{v}, Value{inf}};
    case CmpOp::kEq: return scan::RangePredicate{name, Value{v}, Value{v}};
  }
  return std::nullopt;
}

kernels::Bitmap evaluate(const std::vector<Comparison>& conditions, const lcf::Table& table,
                         const lcf::Schema& schema) {
  const std::size_t rows = table.rows();
  kernels::Bitmap out(kernels::bitmap_words(rows), ~std::uint64_t{0});
  if (rows % 64 != 0 && !out.empty()) out.back() = (std::uint64_t{1} << (rows % 64)) - 1;
  for (const auto& c : conditions) {
    lcf::Column v = c.lhs.eval(table, schema);
    kernels::Bitmap bits(out.size());
    if (lcf::column_type(v) == lcf::ColumnType::kInt64 && is_int(c.rhs)) {
      const auto& x = std::get<std::vector<std::int64_t>>(v);
      std::int64_t k = std::get<std::int64_t>(c.rhs);
      for (std::size_t i = 0; i < rows; ++i)
        if (compare(x[i], c.op, k)) bits[i / 64] |= std::uint64_t{1} << (i % 64);
    } else {
      auto x = as_doubles(std::move(v));
      double k = to_double(c.rhs);
      for (std::size_t i = 0; i < rows; ++i)
        if (compare(x[i], c.op, k)) bits[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    kernels::bitmap_and(out, bits);
  }
  return out;
}

Json value_to_json(const Value& v) {
  if (is_int(v)) return std::get<std::int64_t>(v);
  double d = std::get<double>(v);
  // JSON has no infinities; open interval bounds are spelled out.
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  return d;
}

Value value_from_json(const Json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  if (j == "inf") return std::numeric_limits<double>::infinity();
  if (j == "-inf") return -std::numeric_limits<double>::infinity();
  throw Error(ErrorKind::kInvalidArgument, "value is not a number: " + j.dump());
}

std::string value_to_string(const Value& v) {
  return is_int(v) ? std::to_string(std::get<std::int64_t>(v)) : fmt::format("{}", std::get<double>(v));
}

}  // namespace lambada::engine
