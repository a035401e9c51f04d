#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lambada/engine/aggregate.hpp"
#include "lambada/engine/expr.hpp"
#include "lambada/exchange/exchange.hpp"
#include "lambada/scan/predicate.hpp"

namespace lambada::engine {

enum class Scope { kDriver, kServerless };
enum class OpKind { kScanFiles, kFilter, kMap, kPartialAggregate, kExchange, kFinalAggregate, kCollect };

std::string_view scope_name(Scope s);
std::string_view op_name(OpKind k);

struct ScanFilesOp {
  std::string bucket;
  std::vector<std::string> keys;
  scan::PredicateSet pushed;  // intervals and projection
};
struct FilterOp {
  std::vector<Comparison> conditions;  // conjunction
};
struct MapOp {
  std::vector<std::pair<std::string, Expr>> outputs;
};
struct AggregateOp {
  std::vector<std::string> keys;
  std::vector<AggSpec> aggs;
};
struct ExchangeOp {
  exchange::ExchangeConfig config;
};
struct CollectOp {};

using OpBody = std::variant<ScanFilesOp, FilterOp, MapOp, AggregateOp, ExchangeOp, CollectOp>;

struct Operator {
  OpKind kind = OpKind::kCollect;
  Scope scope = Scope::kDriver;
  OpBody body = CollectOp{};
  lcf::Schema output;  // schema of the rows the operator emits; empty for aggregates and Collect
};

/// A linear chain of scoped operators from ScanFiles to Collect.
class LogicalPlan {
 public:
  LogicalPlan() = default;
  /// Throws Error(kInvalidArgument) when the chain breaks a plan invariant.
  explicit LogicalPlan(std::vector<Operator> ops);

  const std::vector<Operator>& ops() const noexcept { return ops_; }
  const ScanFilesOp& scan() const;
  const AggregateOp* aggregate() const;
  const ExchangeOp* exchange() const;
  std::size_t files() const { return scan().keys.size(); }

  /// Throws Error(kInvalidArgument): the first operator must be ScanFiles, the
  /// last the only Collect, in driver scope; Exchange runs serverless and sits
  /// between the partial and final aggregates; serverless operators precede
  /// driver ones.
  void validate() const;

  /// One operator per line with its scope.
  std::string pretty() const;

  /// Operators run by workers, with the file list left out.
  Json serverless_json() const;
  /// Inverse of serverless_json, with `keys` as the worker's files.
  static LogicalPlan from_serverless_json(const Json& j, std::vector<std::string> keys);

 private:
  std::vector<Operator> ops_;
};

/// Declared combining operator of a reduce.
struct Reducer {
  AggFunc func = AggFunc::kSum;
  bool associative = true;
};

/// Fluent frontend: from_lcf(...).filter(...).map(...).reduce(...).
class Pipeline {
 public:
  static Pipeline from_lcf(std::string bucket, std::vector<std::string> keys);

  Pipeline& filter(Comparison c);
  /// One output column named "value".
  Pipeline& map(Expr e);
  Pipeline& map(std::vector<std::pair<std::string, Expr>> outputs);
  /// Reduces the single column of the preceding map, or the first column.
  Pipeline& reduce(Reducer r);
  Pipeline& aggregate(std::vector<std::string> keys, std::vector<AggSpec> aggs);
  /// Repartitions partial aggregates among the workers by group before the final aggregate.
  Pipeline& exchange(exchange::ExchangeConfig config);

  /// Assigns scopes and pushes comparisons on bare source columns and the set
  /// of used columns into the scan. Throws Error(kNonAssociativeReduce),
  /// Error(kUnknownColumn) or Error(kTypeMismatch).
  LogicalPlan build(const lcf::Schema& source) const;

 private:
  struct Step {
    OpKind kind;
    std::vector<Comparison> filter;
    std::vector<std::pair<std::string, Expr>> map;
    std::optional<Reducer> reducer;
    AggregateOp aggregate;
    exchange::ExchangeConfig exchange;
  };

  std::string bucket_;
  std::vector<std::string> keys_;
  std::vector<Step> steps_;
};

}  // namespace lambada::engine
