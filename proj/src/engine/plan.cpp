#include "lambada/engine/plan.hpp"

#include <set>

#include <fmt/format.h>

#include "lambada/scan/scan.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::kInvalidArgument, "plan: " + msg); }

Json schema_json(const lcf::Schema& s) {
  Json out = Json::array();
  for (const auto& c : s.columns()) out.push_back({c.name, std::string(lcf::type_name(c.type))});
  return out;
}

lcf::Schema schema_from_json(const Json& j) {
  if (j.empty()) return {};
  std::vector<lcf::ColumnDef> cols;
  for (const auto& c : j) {
    auto type = c.at(1).get<std::string>() == lcf::type_name(lcf::ColumnType::kFloat64) ? lcf::ColumnType::kFloat64
                                                                                         : lcf::ColumnType::kInt64;
    cols.push_back({c.at(0).get<std::string>(), type});
  }
  return lcf::Schema(std::move(cols));
}

Json exchange_json(const exchange::ExchangeConfig& c) {
  return {{"variant", c.variant().name()},
          {"side", c.side},
          {"bucket_prefix", c.naming.bucket_prefix},
          {"buckets", c.naming.buckets},
          {"exchange_id", c.naming.exchange_id},
          {"scale", c.scale},
          {"connections", c.connections},
          {"partition_ns_per_byte", c.partition_ns_per_byte},
          {"poll_interval_us", c.poll_interval.count()},
          {"poll_attempts", c.poll_attempts}};
}

exchange::ExchangeConfig exchange_from_json(const Json& j) {
  exchange::ExchangeConfig c;
  auto v = exchange::ExchangeVariant::parse(j.at("variant").get<std::string>());
  c.levels = v.levels;
  c.write_combining = v.write_combining;
  c.side = j.at("side").get<std::uint64_t>();
  c.naming.bucket_prefix = j.at("bucket_prefix").get<std::string>();
  c.naming.buckets = j.at("buckets").get<std::uint32_t>();
  c.naming.exchange_id = j.at("exchange_id").get<std::uint64_t>();
  c.scale = j.at("scale").get<std::uint32_t>();
  c.connections = j.at("connections").get<int>();
  c.partition_ns_per_byte = j.at("partition_ns_per_byte").get<double>();
  c.poll_interval = sim::Duration(j.at("poll_interval_us").get<std::int64_t>());
  c.poll_attempts = j.at("poll_attempts").get<int>();
  return c;
}

Json body_json(const Operator& op) {
  return std::visit(
      [](const auto& b) -> Json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ScanFilesOp>) {
          Json ranges = Json::array();
          for (const auto& r : b.pushed.ranges())
            ranges.push_back({{"column", r.column}, {"lo", value_to_json(r.lo)}, {"hi", value_to_json(r.hi)}});
          return {{"bucket", b.bucket}, {"ranges", ranges}, {"projection", b.pushed.projection()}};
        } else if constexpr (std::is_same_v<T, FilterOp>) {
          Json conds = Json::array();
          for (const auto& c : b.conditions) conds.push_back(c.to_json());
          return {{"conditions", conds}};
        } else if constexpr (std::is_same_v<T, MapOp>) {
          Json outs = Json::array();
          for (const auto& [name, e] : b.outputs) outs.push_back({name, e.to_json()});
          return {{"outputs", outs}};
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          Json aggs = Json::array();
          for (const auto& a : b.aggs) aggs.push_back(a.to_json());
          return {{"keys", b.keys}, {"aggs", aggs}};
        } else if constexpr (std::is_same_v<T, ExchangeOp>) {
          return exchange_json(b.config);
        } else {
          return Json::object();
        }
      },
      op.body);
}

OpBody body_from_json(OpKind kind, const Json& j) {
  switch (kind) {
    case OpKind::kScanFiles: {
      ScanFilesOp op;
      op.bucket = j.at("bucket").get<std::string>();
      for (const auto& r : j.at("ranges")) {
        Value lo = value_from_json(r.at("lo")), hi = value_from_json(r.at("hi"));
        auto col = r.at("column").get<std::string>();
        if (std::holds_alternative<std::int64_t>(lo) && std::holds_alternative<std::int64_t>(hi))
          op.pushed.where(col, std::get<std::int64_t>(lo), std::get<std::int64_t>(hi));
        else
          op.pushed.where(col, std::get<double>(lo), std::get<double>(hi));
      }
      op.pushed.project(j.at("projection").get<std::vector<std::string>>());
      return op;
    }
    case OpKind::kFilter: {
      FilterOp op;
      for (const auto& c : j.at("conditions")) op.conditions.push_back(Comparison::from_json(c));
      return op;
    }
    case OpKind::kMap: {
      MapOp op;
      for (const auto& o : j.at("outputs")) op.outputs.emplace_back(o.at(0).get<std::string>(), Expr::from_json(o.at(1)));
      return op;
    }
    case OpKind::kPartialAggregate:
    case OpKind::kFinalAggregate: {
      AggregateOp op;
      op.keys = j.at("keys").get<std::vector<std::string>>();
      for (const auto& a : j.at("aggs")) op.aggs.push_back(AggSpec::from_json(a));
      return op;
    }
    case OpKind::kExchange: return ExchangeOp{exchange_from_json(j)};
    case OpKind::kCollect: return CollectOp{};
  }
  return CollectOp{};
}

OpKind parse_op(std::string_view name) {
  for (auto k : {OpKind::kScanFiles, OpKind::kFilter, OpKind::kMap, OpKind::kPartialAggregate, OpKind::kExchange,
                 OpKind::kFinalAggregate, OpKind::kCollect})
    if (op_name(k) == name) return k;
  invalid(fmt::format("unknown operator '{}'", name));
}

std::string describe(const Operator& op) {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, ScanFilesOp>) {
          std::string proj;
          for (const auto& c : b.pushed.projection()) proj += (proj.empty() ? "" : ", ") + c;
          return fmt::format("{} files of {}, where {}, project [{}]", b.keys.size(), b.bucket, b.pushed.describe(),
                             proj);
        } else if constexpr (std::is_same_v<T, FilterOp>) {
          std::string s;
          for (const auto& c : b.conditions) s += (s.empty() ? "" : " and ") + c.to_string();
          return s;
        } else if constexpr (std::is_same_v<T, MapOp>) {
          std::string s;
          for (const auto& [name, e] : b.outputs) s += (s.empty() ? "" : ", ") + name + " = " + e.to_string();
          return s;
        } else if constexpr (std::is_same_v<T, AggregateOp>) {
          std::string keys, aggs;
          for (const auto& k : b.keys) keys += (keys.empty() ? "" : ", ") + k;
          for (const auto& a : b.aggs)
            aggs += fmt::format("{}{} = {}({})", aggs.empty() ? "" : ", ", a.name, agg_name(a.func),
                                a.func == AggFunc::kCount ? "*" : a.arg.to_string());
          return fmt::format("by [{}]: {}", keys, aggs);
        } else if constexpr (std::is_same_v<T, ExchangeOp>) {
          return fmt::format("{} over {} bucket(s)", b.config.variant().name(), b.config.naming.buckets);
        } else {
          return "";
        }
      },
      op.body);
}

lcf::Schema map_schema(const std::vector<std::pair<std::string, Expr>>& outputs, const lcf::Schema& input) {
  std::vector<lcf::ColumnDef> cols;
  for (const auto& [name, e] : outputs) cols.push_back({name, e.type(input)});
  return lcf::Schema(std::move(cols));
}

}  // namespace

std::string_view scope_name(Scope s) { return s == Scope::kDriver ? "driver" : "serverless"; }

std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::kScanFiles: return "ScanFiles";
    case OpKind::kFilter: return "Filter";
    case OpKind::kMap: return "Map";
    case OpKind::kPartialAggregate: return "PartialAggregate";
    case OpKind::kExchange: return "Exchange";
    case OpKind::kFinalAggregate: return "FinalAggregate";
    case OpKind::kCollect: return "Collect";
  }
  return "?";
}

LogicalPlan::LogicalPlan(std::vector<Operator> ops) : ops_(std::move(ops)) { validate(); }

const ScanFilesOp& LogicalPlan::scan() const {
  if (ops_.empty() || ops_.front().kind != OpKind::kScanFiles) invalid("no ScanFiles operator");
  return std::get<ScanFilesOp>(ops_.front().body);
}

const AggregateOp* LogicalPlan::aggregate() const {
  for (const auto& op : ops_)
    if (op.kind == OpKind::kPartialAggregate) return &std::get<AggregateOp>(op.body);
  return nullptr;
}

const ExchangeOp* LogicalPlan::exchange() const {
  for (const auto& op : ops_)
    if (op.kind == OpKind::kExchange) return &std::get<ExchangeOp>(op.body);
  return nullptr;
}

void LogicalPlan::validate() const {
  if (ops_.empty() || ops_.front().kind != OpKind::kScanFiles) invalid("must start with ScanFiles");
  if (ops_.front().scope != Scope::kServerless) invalid("ScanFiles runs serverless");
  if (ops_.back().kind != OpKind::kCollect || ops_.back().scope != Scope::kDriver)
    invalid("must end with a Collect in driver scope");
  bool driver = false;
  int partial = 0, final_agg = 0, exchanges = 0;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const auto& op = ops_[i];
    if (op.kind == OpKind::kCollect && i + 1 != ops_.size()) invalid("more than one Collect");
    if (op.kind == OpKind::kScanFiles && i != 0) invalid("more than one ScanFiles");
    if (op.scope == Scope::kDriver) driver = true;
    else if (driver) invalid(fmt::format("{} runs serverless after a driver operator", op_name(op.kind)));
    switch (op.kind) {
      case OpKind::kPartialAggregate:
        if (partial++ || final_agg) invalid("one PartialAggregate before the FinalAggregate");
        break;
      case OpKind::kExchange:
        if (op.scope != Scope::kServerless) invalid("Exchange runs serverless");
        if (exchanges++ || !partial || final_agg) invalid("Exchange sits between the two aggregates");
        break;
      case OpKind::kFinalAggregate:
        if (final_agg++ || !partial) invalid("FinalAggregate needs a PartialAggregate");
        break;
      case OpKind::kFilter:
      case OpKind::kMap:
        if (partial) invalid(fmt::format("{} after an aggregate", op_name(op.kind)));
        break;
      default: break;
    }
  }
  if (partial != final_agg) invalid("PartialAggregate without a FinalAggregate");
}

std::string LogicalPlan::pretty() const {
  std::string out;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const auto& op = ops_[i];
    auto text = describe(op);
    out += fmt::format("{:>2} [{}] {}{}{}\n", i, scope_name(op.scope), op_name(op.kind), text.empty() ? "" : ": ",
                       text);
  }
  return out;
}

Json LogicalPlan::serverless_json() const {
  Json ops = Json::array();
  for (const auto& op : ops_) {
    if (op.scope != Scope::kServerless) continue;
    ops.push_back({{"op", std::string(op_name(op.kind))}, {"body", body_json(op)}, {"output", schema_json(op.output)}});
  }
  return ops;
}

LogicalPlan LogicalPlan::from_serverless_json(const Json& j, std::vector<std::string> keys) {
  std::vector<Operator> ops;
  try {
    for (const auto& o : j) {
      Operator op;
      op.kind = parse_op(o.at("op").get<std::string>());
      op.scope = Scope::kServerless;
      op.body = body_from_json(op.kind, o.at("body"));
      op.output = schema_from_json(o.at("output"));
      if (auto* s = std::get_if<ScanFilesOp>(&op.body)) s->keys = keys;
      ops.push_back(std::move(op));
    }
  } catch (const Json::exception& e) {
    invalid(std::string("malformed fragment: ") + e.what());
  }
  const AggregateOp* partial = nullptr;
  for (const auto& op : ops)
    if (op.kind == OpKind::kPartialAggregate) partial = &std::get<AggregateOp>(op.body);
  bool has_final = !ops.empty() && ops.back().kind == OpKind::kFinalAggregate;
  if (partial && !has_final) {
    AggregateOp final_op = *partial;
    ops.push_back({OpKind::kFinalAggregate, Scope::kDriver, final_op, {}});
  }
  ops.push_back({OpKind::kCollect, Scope::kDriver, CollectOp{}, {}});
  return LogicalPlan(std::move(ops));
}

Pipeline Pipeline::from_lcf(std::string bucket, std::vector<std::string> keys) {
  Pipeline p;
  p.bucket_ = std::move(bucket);
  p.keys_ = std::move(keys);
  return p;
}

Pipeline& Pipeline::filter(Comparison c) {
  if (!steps_.empty() && steps_.back().kind == OpKind::kFilter) {
    steps_.back().filter.push_back(std::move(c));
    return *this;
  }
  Step s{OpKind::kFilter, {}, {}, {}, {}, {}};
  s.filter.push_back(std::move(c));
  steps_.push_back(std::move(s));
  return *this;
}

Pipeline& Pipeline::map(Expr e) { return map({{"value", std::move(e)}}); }

Pipeline& Pipeline::map(std::vector<std::pair<std::string, Expr>> outputs) {
  steps_.push_back({OpKind::kMap, {}, std::move(outputs), {}, {}, {}});
  return *this;
}

Pipeline& Pipeline::reduce(Reducer r) {
  steps_.push_back({OpKind::kPartialAggregate, {}, {}, r, {}, {}});
  return *this;
}

Pipeline& Pipeline::aggregate(std::vector<std::string> keys, std::vector<AggSpec> aggs) {
  steps_.push_back({OpKind::kPartialAggregate, {}, {}, {}, AggregateOp{std::move(keys), std::move(aggs)}, {}});
  return *this;
}

Pipeline& Pipeline::exchange(exchange::ExchangeConfig config) {
  steps_.push_back({OpKind::kExchange, {}, {}, {}, {}, std::move(config)});
  return *this;
}

LogicalPlan Pipeline::build(const lcf::Schema& source) const {
  scan::PredicateSet pushed;
  std::set<std::string> used;
  std::vector<Operator> body;
  lcf::Schema current = source;
  bool mapped = false, aggregated = false, exchanged = false;
  std::optional<AggregateOp> agg;

  for (const auto& step : steps_) {
    switch (step.kind) {
      case OpKind::kFilter: {
        if (aggregated) invalid("filter after an aggregate");
        FilterOp residual;
        for (const auto& c : step.filter) {
          Comparison r = c.resolve(current);
          std::optional<scan::RangePredicate> interval;
          if (!mapped) interval = as_interval(r, current);
          if (interval) {
            if (std::holds_alternative<std::int64_t>(interval->lo))
              pushed.where(interval->column, std::get<std::int64_t>(interval->lo), std::get<std::int64_t>(interval->hi));
            else
              pushed.where(interval->column, std::get<double>(interval->lo), std::get<double>(interval->hi));
          } else {
            if (!mapped) r.lhs.collect_columns(used);
            residual.conditions.push_back(std::move(r));
          }
        }
        if (!residual.conditions.empty())
          body.push_back({OpKind::kFilter, Scope::kServerless, std::move(residual), current});
        break;
      }
      case OpKind::kMap: {
        if (aggregated) invalid("map after an aggregate");
        MapOp op;
        for (const auto& [name, e] : step.map) {
          Expr r = e.resolve(current);
          if (!mapped) r.collect_columns(used);
          op.outputs.emplace_back(name, std::move(r));
        }
        lcf::Schema out = map_schema(op.outputs, current);
        body.push_back({OpKind::kMap, Scope::kServerless, std::move(op), out});
        current = out;
        mapped = true;
        break;
      }
      case OpKind::kPartialAggregate: {
        if (aggregated) invalid("more than one aggregate");
        AggregateOp op;
        if (step.reducer) {
          if (!step.reducer->associative || step.reducer->func == AggFunc::kAvg)
            throw Error(ErrorKind::kNonAssociativeReduce,
                        fmt::format("reduce with {} is not declared associative and commutative",
                                    agg_name(step.reducer->func)));
          op.aggs.push_back({step.reducer->func, Expr::col(current[0].name), std::string(agg_name(step.reducer->func))});
        } else {
          op = step.aggregate;
          for (auto& a : op.aggs) a.arg = a.arg.resolve(current);
        }
        if (!mapped) {
          for (const auto& k : op.keys) used.insert(current[current.require(k)].name);
          for (const auto& a : op.aggs)
            if (a.func != AggFunc::kCount) a.arg.collect_columns(used);
        }
        GroupTable check(op.keys, op.aggs, current);
        body.push_back({OpKind::kPartialAggregate, Scope::kServerless, op, {}});
        agg = op;
        aggregated = true;
        break;
      }
      case OpKind::kExchange:
        if (!aggregated || exchanged) invalid("exchange must follow the one aggregate");
        body.push_back({OpKind::kExchange, Scope::kServerless, ExchangeOp{step.exchange}, {}});
        exchanged = true;
        break;
      default: break;
    }
  }
  if (!mapped && !aggregated) {
    for (const auto& c : source.columns()) used.insert(c.name);
  }

  std::vector<std::string> projection;
  for (const auto& c : source.columns())
    if (used.count(c.name)) projection.push_back(c.name);
  if (projection.empty()) projection.push_back(source[0].name);
  pushed.project(projection);
  pushed.bind(source);
  lcf::Schema scanned = scan::output_schema(source, pushed);
  // Operators before the first map saw the source schema; they see the projected one at run time.
  for (auto& op : body) {
    if (op.kind == OpKind::kMap) break;
    if (op.kind == OpKind::kFilter) op.output = scanned;
  }
  if (!mapped && !aggregated) current = scanned;

  std::vector<Operator> ops;
  ops.push_back({OpKind::kScanFiles, Scope::kServerless, ScanFilesOp{bucket_, keys_, pushed}, scanned});
  for (auto& op : body) ops.push_back(std::move(op));
  if (agg) ops.push_back({OpKind::kFinalAggregate, exchanged ? Scope::kServerless : Scope::kDriver, *agg, {}});
  ops.push_back({OpKind::kCollect, Scope::kDriver, CollectOp{}, current});
  return LogicalPlan(std::move(ops));
}

}  // namespace lambada::engine
