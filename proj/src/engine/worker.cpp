#include "lambada/engine/worker.hpp"

#include <fmt/format.h>

#include "lambada/exchange/exchange.hpp"
#include "lambada/scan/scan.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t group_hash(const std::vector<std::int64_t>& key) {
  std::uint64_t h = 0;
  for (auto v : key) h = mix(h, static_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t table_bytes(const lcf::Table& t) { return t.rows() * t.columns.size() * 8; }

sim::Bytes to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

// Applies the row-level operators of one batch.
struct RowPipeline {
  std::vector<const Operator*> ops;  // Filter and Map
  lcf::Schema input;

  lcf::Table run(lcf::Table t) const {
    lcf::Schema schema = input;
    for (const Operator* op : ops) {
      if (op->kind == OpKind::kFilter) {
        auto bits = evaluate(std::get<FilterOp>(op->body).conditions, t, schema);
        std::vector<std::size_t> all(schema.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        t = scan::gather(t, all, bits, t.rows());
      } else {
        lcf::Table out;
        for (const auto& [name, e] : std::get<MapOp>(op->body).outputs) out.columns.push_back(e.eval(t, schema));
        t = std::move(out);
        schema = op->output;
      }
    }
    return t;
  }
};

}  // namespace

sim::Task<WorkerResult> execute_fragment(WorkerServices services, sim::Node& node, PlanFragment fragment) {
  WorkerResult result;
  result.query = fragment.query;
  result.worker = fragment.worker;
  const sim::SimTime started = node.sim().now();
  std::uint64_t held = 0;
  try {
    LogicalPlan plan = fragment.plan();
    const ScanFilesOp& scan_op = plan.scan();
    RowPipeline rows;
    rows.input = plan.ops().front().output;
    lcf::Schema agg_input = rows.input;
    const AggregateOp* agg = nullptr;
    const ExchangeOp* xchg = nullptr;
    for (const auto& op : plan.ops()) {
      if (op.scope != Scope::kServerless) continue;
      if (op.kind == OpKind::kFilter || op.kind == OpKind::kMap) {
        rows.ops.push_back(&op);
        agg_input = op.output;
      }
      if (op.kind == OpKind::kPartialAggregate) agg = &std::get<AggregateOp>(op.body);
      if (op.kind == OpKind::kExchange) xchg = &std::get<ExchangeOp>(op.body);
    }

    std::optional<GroupTable> groups;
    if (agg) groups.emplace(agg->keys, agg->aggs, agg_input);
    std::vector<lcf::Table> collected;

    scan::BatchSink sink = [&](scan::ScanBatch batch) -> sim::Task<void> {
      lcf::Table t = rows.run(std::move(batch.table));
      if (groups) {
        groups->add(t);
      } else if (t.rows() > 0) {
        node.allocate(table_bytes(t));
        held += table_bytes(t);
        collected.push_back(std::move(t));
      }
      co_return;
    };
    scan::ScanEnv env{services.store, node, services.prices};
    scan::ScanReport report = co_await scan::execute_scan(env, scan_op.bucket, scan_op.keys, scan_op.pushed,
                                                          fragment.scan, sink);
    result.metrics.rows_scanned = report.rows_scanned;
    result.metrics.rows_emitted = report.rows_emitted;
    result.metrics.bytes = report.bytes;
    result.metrics.scan = report.duration;

    if (groups && xchg) {
      const sim::SimTime xstart = node.sim().now();
      std::vector<exchange::Record> records;
      records.reserve(groups->groups());
      for (const auto& [key, states] : groups->states())
        records.push_back({group_hash(key), GroupTable::entry_json(key, states).dump()});
      exchange::ExchangeEnv xenv{services.store, node};
      auto out = co_await exchange::run_exchange(xenv, fragment.worker, fragment.workers, xchg->config,
                                                 std::move(records));
      GroupTable mine(agg->keys, agg->aggs, agg_input);
      Json entries = Json::array();
      for (const auto& r : out.records) entries.push_back(Json::parse(r.value));
      mine.merge_json(entries);
      groups = std::move(mine);
      result.metrics.exchange = node.sim().now() - xstart;
    }

    if (groups) {
      result.payload = groups->state_json();
    } else {
      result.payload = table_json(lcf::concat(collected));
    }
  } catch (const Error& e) {
    result.ok = false;
    result.error_kind = std::string(error_kind_name(e.kind()));
    result.message = e.what();
  } catch (const std::exception& e) {
    result.ok = false;
    result.error_kind = std::string(error_kind_name(ErrorKind::kWorkerError));
    result.message = e.what();
  }
  node.release(held);
  if (!result.ok) result.payload.reset();
  result.metrics.fragment = node.sim().now() - started;
  co_return result;
}

sim::Task<void> run_worker(WorkerServices services, sim::WorkerContext& ctx, sim::Bytes payload) {
  const sim::SimTime started = ctx.node().sim().now();
  // Without a fragment there is no queue to report to, so decoding errors propagate.
  PlanFragment fragment = PlanFragment::decode(payload);
  WorkerResult result = co_await execute_fragment(services, ctx.node(), fragment);
  auto& queue = services.queues.get(fragment.result_queue);
  if (result.encode().size() > services.queues.config().max_message_bytes) {
    std::string key = fmt::format("q{}/w{}", fragment.query, fragment.worker);
    std::string data = result.payload->dump();
    result.payload.reset();
    std::optional<std::string> spill_error;
    try {
      co_await services.store.put(ctx.node(), fragment.spill_bucket, key, to_bytes(data));
      result.spill_key = key;
    } catch (const Error& e) {
      spill_error = e.what();
    }
    if (spill_error) {
      result.ok = false;
      result.error_kind = std::string(error_kind_name(ErrorKind::kWorkerError));
      result.message = "spilling the result failed: " + *spill_error;
    }
  }
  result.metrics.fragment = ctx.node().sim().now() - started;
  result.metrics.body_start = started.time_since_epoch();
  co_await queue.send(result.encode());
}

}  // namespace lambada::engine
