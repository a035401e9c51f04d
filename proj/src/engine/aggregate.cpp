#include "lambada/engine/aggregate.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}

bool less(const Value& a, const Value& b) {
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
    return std::get<std::int64_t>(a) < std::get<std::int64_t>(b);
  auto d = [](const Value& v) {
    return std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v))
                                                    : std::get<double>(v);
  };
  return d(a) < d(b);
}

void fold(AggState& into, const AggState& from) {
  if (from.count == 0) return;
  if (into.count == 0) {
    into = from;
    return;
  }
  into.count = wrap_add(into.count, from.count);
  into.isum = wrap_add(into.isum, from.isum);
  into.fsum += from.fsum;
  if (less(from.min, into.min)) into.min = from.min;
  if (less(into.max, from.max)) into.max = from.max;
}

}  // namespace

std::string_view agg_name(AggFunc f) {
  switch (f) {
    case AggFunc::kSum: return "sum";
    case AggFunc::kCount: return "count";
    case AggFunc::kMin: return "min";
    case AggFunc::kMax: return "max";
    case AggFunc::kAvg: return "avg";
  }
  return "?";
}

AggFunc parse_agg(std::string_view name) {
  for (auto f : {AggFunc::kSum, AggFunc::kCount, AggFunc::kMin, AggFunc::kMax, AggFunc::kAvg})
    if (agg_name(f) == name) return f;
  throw Error(ErrorKind::kInvalidArgument, fmt::format("unknown aggregate '{}'", name));
}

Json AggSpec::to_json() const {
  return {{"func", std::string(agg_name(func))}, {"arg", arg.to_json()}, {"name", name}};
}

AggSpec AggSpec::from_json(const Json& j) {
  try {
    return {parse_agg(j.at("func").get<std::string>()), Expr::from_json(j.at("arg")), j.at("name").get<std::string>()};
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed aggregate: ") + e.what());
  }
}

std::string QueryResult::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (std::holds_alternative<double>(row[i]))
        out += fmt::format("{:.17g}", std::get<double>(row[i]));
      else
        out += value_to_string(row[i]);
    }
    out += '\n';
  }
  return out;
}

Json QueryResult::to_json() const {
  Json rows_json = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(value_to_json(v));
    rows_json.push_back(std::move(r));
  }
  return {{"columns", columns}, {"rows", std::move(rows_json)}};
}

GroupTable::GroupTable(std::vector<std::string> keys, std::vector<AggSpec> aggs, const lcf::Schema& input)
    : keys_(std::move(keys)), aggs_(std::move(aggs)), input_(input) {
  for (const auto& k : keys_)
    if (input_[input_.require(k)].type != lcf::ColumnType::kInt64)
      throw Error(ErrorKind::kTypeMismatch, fmt::format("group key '{}' is not INT64", k));
  for (auto& a : aggs_) {
    a.arg = a.arg.resolve(input_);
    arg_types_.push_back(a.arg.type(input_));
  }
}

void GroupTable::add(const lcf::Table& table) {
  const std::size_t rows = table.rows();
  if (rows == 0) return;
  std::vector<const std::vector<std::int64_t>*> key_cols;
  for (const auto& k : keys_) key_cols.push_back(&std::get<std::vector<std::int64_t>>(table.columns.at(input_.require(k))));
  std::vector<lcf::Column> args;
  for (const auto& a : aggs_) args.push_back(a.func == AggFunc::kCount ? lcf::Column{} : a.arg.eval(table, input_));

  std::vector<std::int64_t> key(keys_.size());
  std::vector<AggState>* states = nullptr;
  for (std::size_t r = 0; r < rows; ++r) {
    bool same = states != nullptr;
    for (std::size_t k = 0; k < key.size(); ++k) {
      std::int64_t v = (*key_cols[k])[r];
      if (v != key[k]) same = false;
      key[k] = v;
    }
    if (!same) {
      auto it = groups_.find(key);
      if (it == groups_.end()) it = groups_.emplace(key, std::vector<AggState>(aggs_.size())).first;
      states = &it->second;
    }
    for (std::size_t a = 0; a < aggs_.size(); ++a) {
      AggState& s = (*states)[a];
      if (aggs_[a].func == AggFunc::kCount) {
        ++s.count;
        continue;
      }
      Value v;
      if (auto* i = std::get_if<std::vector<std::int64_t>>(&args[a])) {
        std::int64_t x = (*i)[r];
        s.isum = wrap_add(s.isum, x);
        v = x;
      } else {
        double x = std::get<std::vector<double>>(args[a])[r];
        s.fsum += x;
        v = x;
      }
      if (s.count == 0 || less(v, s.min)) s.min = v;
      if (s.count == 0 || less(s.max, v)) s.max = v;
      ++s.count;
    }
  }
}

void GroupTable::merge(const GroupTable& other) {
  if (other.keys_ != keys_ || other.aggs_.size() != aggs_.size())
    throw Error(ErrorKind::kInvalidArgument, "merging aggregates of different shapes");
  for (const auto& [key, states] : other.groups_) {
    auto [it, fresh] = groups_.try_emplace(key, states);
    if (fresh) continue;
    for (std::size_t a = 0; a < states.size(); ++a) fold(it->second[a], states[a]);
  }
}

Json GroupTable::entry_json(const std::vector<std::int64_t>& key, const std::vector<AggState>& states) {
  Json s = Json::array();
  for (const auto& st : states)
    s.push_back(Json::array({st.count, st.isum, st.fsum, value_to_json(st.min), value_to_json(st.max)}));
  return Json::array({key, std::move(s)});
}

Json GroupTable::state_json() const {
  Json out = Json::array();
  for (const auto& [key, states] : groups_) out.push_back(entry_json(key, states));
  return out;
}

void GroupTable::merge_json(const Json& state) {
  try {
    for (const auto& entry : state) {
      auto key = entry.at(0).get<std::vector<std::int64_t>>();
      const auto& s = entry.at(1);
      if (key.size() != keys_.size() || s.size() != aggs_.size())
        throw Error(ErrorKind::kInvalidArgument, "partial aggregate of a different shape");
      std::vector<AggState> states(aggs_.size());
      for (std::size_t a = 0; a < states.size(); ++a) {
        const auto& e = s.at(a);
        states[a].count = e.at(0).get<std::int64_t>();
        states[a].isum = e.at(1).get<std::int64_t>();
        states[a].fsum = e.at(2).get<double>();
        states[a].min = value_from_json(e.at(3));
        states[a].max = value_from_json(e.at(4));
      }
      auto [it, fresh] = groups_.try_emplace(std::move(key), states);
      if (!fresh)
        for (std::size_t a = 0; a < states.size(); ++a) fold(it->second[a], states[a]);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed partial aggregate: ") + e.what());
  }
}

QueryResult GroupTable::finalize() const {
  QueryResult out;
  out.columns = keys_;
  for (const auto& a : aggs_) out.columns.push_back(a.name);
  auto emit = [&](const std::vector<std::int64_t>& key, const std::vector<AggState>* states) {
    std::vector<Value> row(key.begin(), key.end());
    for (std::size_t a = 0; a < aggs_.size(); ++a) {
      AggState empty;
      const AggState& s = states ? (*states)[a] : empty;
      bool is_int = arg_types_[a] == lcf::ColumnType::kInt64;
      switch (aggs_[a].func) {
        case AggFunc::kCount: row.emplace_back(s.count); break;
        case AggFunc::kSum: row.push_back(is_int ? Value{s.isum} : Value{s.fsum}); break;
        case AggFunc::kMin: row.push_back(s.min); break;
        case AggFunc::kMax: row.push_back(s.max); break;
        case AggFunc::kAvg:
          row.emplace_back(s.count == 0 ? 0.0
                                        : (is_int ? static_cast<double>(s.isum) : s.fsum) / static_cast<double>(s.count));
          break;
      }
    }
    out.rows.push_back(std::move(row));
  };
  for (const auto& [key, states] : groups_) emit(key, &states);
  // A global aggregate over no rows still yields its one row.
  if (keys_.empty() && groups_.empty()) emit({}, nullptr);
  return out;
}

std::int64_t merge_partials(const std::vector<std::int64_t>& partials) {
  std::int64_t total = 0;
  for (auto p : partials) total = wrap_add(total, p);
  return total;
}

}  // namespace lambada::engine
