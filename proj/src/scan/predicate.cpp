#include "lambada/scan/predicate.hpp"

#include <fmt/format.h>

#include <cmath>

#include "lambada/sim/error.hpp"

namespace lambada::scan {

PredicateSet& PredicateSet::where(std::string column, std::int64_t lo, std::int64_t hi) {
  ranges_.push_back({std::move(column), lo, hi});
  return *this;
}

PredicateSet& PredicateSet::where(std::string column, double lo, double hi) {
  ranges_.push_back({std::move(column), lo, hi});
  return *this;
}

PredicateSet& PredicateSet::project(std::vector<std::string> columns) {
  projection_ = std::move(columns);
  return *this;
}

std::vector<BoundPredicate> PredicateSet::bind(const lcf::Schema& schema) const {
  std::vector<BoundPredicate> out;
  out.reserve(ranges_.size());
  for (const auto& r : ranges_) {
    const std::size_t col = schema.require(r.column);
    const lcf::ColumnType type = schema[col].type;
    const bool is_int = type == lcf::ColumnType::kInt64;
    if (std::holds_alternative<std::int64_t>(r.lo) != is_int || std::holds_alternative<std::int64_t>(r.hi) != is_int)
      throw Error(ErrorKind::kTypeMismatch, fmt::format("predicate bounds on '{}' must be {}", r.column,
                                                        lcf::type_name(type)));
    if (r.hi < r.lo) throw Error(ErrorKind::kInvalidArgument, fmt::format("empty interval on '{}'", r.column));
    if (!is_int && (std::isnan(std::get<double>(r.lo)) || std::isnan(std::get<double>(r.hi))))
      throw Error(ErrorKind::kInvalidArgument, fmt::format("NaN bound on '{}'", r.column));
    out.push_back({col, type, r.lo, r.hi});
  }
  return out;
}

std::vector<std::size_t> PredicateSet::bind_projection(const lcf::Schema& schema) const {
  std::vector<std::size_t> out;
  if (projection_.empty()) {
    for (std::size_t i = 0; i < schema.size(); ++i) out.push_back(i);
    return out;
  }
  for (const auto& name : projection_) out.push_back(schema.require(name));
  return out;
}

std::string PredicateSet::describe() const {
  if (ranges_.empty()) return "true";
  std::string out;
  for (const auto& r : ranges_) {
    if (!out.empty()) out += " and ";
    auto show = [](const Value& v) {
      return std::visit([](auto x) { return fmt::format("{}", x); }, v);
    };
    out += fmt::format("{} in [{}, {}]", r.column, show(r.lo), show(r.hi));
  }
  return out;
}

namespace {

bool intersects(const lcf::ColumnStats& s, const BoundPredicate& p) {
  if (p.type == lcf::ColumnType::kInt64)
    return s.min_i64() <= std::get<std::int64_t>(p.hi) && std::get<std::int64_t>(p.lo) <= s.max_i64();
  return s.min_f64() <= std::get<double>(p.hi) && std::get<double>(p.lo) <= s.max_f64();
}

}  // namespace

std::vector<std::size_t> prune_row_groups(const lcf::FileFooter& footer, const std::vector<BoundPredicate>& preds) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < footer.row_groups.size(); ++g) {
    const auto& cols = footer.row_groups[g].columns;
    bool keep = true;
    for (const auto& p : preds) keep = keep && intersects(cols.at(p.column).stats, p);
    if (keep) out.push_back(g);
  }
  return out;
}

std::vector<std::size_t> prune_row_groups(const lcf::FileFooter& footer, const PredicateSet& preds) {
  return prune_row_groups(footer, preds.bind(footer.schema));
}

kernels::Bitmap filter_rows(const lcf::Table& table, std::size_t rows, const std::vector<BoundPredicate>& preds) {
  kernels::Bitmap sel(kernels::bitmap_words(rows), ~std::uint64_t{0});
  if (rows % 64 != 0) sel.back() = (std::uint64_t{1} << (rows % 64)) - 1;
  for (const auto& p : preds) {
    kernels::Bitmap bits;
    if (p.type == lcf::ColumnType::kInt64) {
      const auto& v = std::get<std::vector<std::int64_t>>(table.columns.at(p.column));
      bits = kernels::filter_range(std::span<const std::int64_t>(v), std::get<std::int64_t>(p.lo),
                                   std::get<std::int64_t>(p.hi));
    } else {
      const auto& v = std::get<std::vector<double>>(table.columns.at(p.column));
      bits = kernels::filter_range(std::span<const double>(v), std::get<double>(p.lo), std::get<double>(p.hi));
    }
    kernels::bitmap_and(sel, bits);
  }
  return sel;
}

lcf::Table gather(const lcf::Table& table, const std::vector<std::size_t>& columns, const kernels::Bitmap& selection,
                  std::size_t rows) {
  const std::size_t selected = kernels::bitmap_count(selection);
  lcf::Table out;
  out.columns.reserve(columns.size());
  const bool all = selected == rows;
  const auto indices = all ? std::vector<std::uint32_t>{} : kernels::bitmap_to_indices(selection, rows);
  for (std::size_t c : columns) {
    std::visit(
        [&](const auto& src) {
          using V = std::decay_t<decltype(src)>;
          if (all) {
            out.columns.emplace_back(src);
            return;
          }
          V dst;
          dst.reserve(indices.size());
          for (auto i : indices) dst.push_back(src[i]);
          out.columns.emplace_back(std::move(dst));
        },
        table.columns.at(c));
  }
  return out;
}

}  // namespace lambada::scan
