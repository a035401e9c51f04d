#include "lambada/engine/driver.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lambada/engine/fragment.hpp"
#include "lambada/engine/worker.hpp"
#include "lambada/exchange/exchange.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

double s(sim::Duration d) { return sim::to_seconds(d); }

// Schema of the rows entering the partial aggregate, or of the collected rows.
lcf::Schema stage_schema(const LogicalPlan& plan) {
  lcf::Schema schema;
  for (const auto& op : plan.ops()) {
    if (op.kind == OpKind::kPartialAggregate) break;
    if (op.kind == OpKind::kScanFiles || op.kind == OpKind::kFilter || op.kind == OpKind::kMap) schema = op.output;
  }
  return schema;
}

QueryResult rows_result(const lcf::Schema& schema, const lcf::Table& table) {
  QueryResult out;
  for (const auto& c : schema.columns()) out.columns.push_back(c.name);
  const std::size_t rows = table.rows();
  out.rows.assign(rows, {});
  for (const auto& col : table.columns) {
    std::visit(
        [&](const auto& v) {
          for (std::size_t r = 0; r < rows; ++r) out.rows[r].emplace_back(v[r]);
        },
        col);
  }
  return out;
}

}  // namespace

std::string QueryReport::csv_header() {
  return "query,workers,files,memory_mib,latency_s,invoke_s,last_posted_s,last_received_s,collect_s,rows_scanned,"
         "bytes,spilled,reads,writes,lists,request_usd,worker_usd,total_usd";
}

std::string QueryReport::csv_row() const {
  return fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{},{},{},{},{},{},{}", query, workers, files,
                     memory_mib, s(latency), s(last_initiated), s(last_posted), s(last_received), s(collect),
                     rows_scanned, bytes, spilled, usage.reads, usage.writes, usage.lists,
                     usage.request_usd.to_plain_string(), usage.worker_usd.to_plain_string(),
                     total_usd().to_plain_string());
}

std::string QueryReport::workers_csv() const {
  std::string out =
      "worker,generation,cold,ok,initiated_s,started_s,body_start_s,posted_s,received_s,scan_s,exchange_s,"
      "rows_scanned,bytes\n";
  for (const auto& w : per_worker)
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", w.worker, w.generation,
                       w.cold ? 1 : 0, w.ok ? 1 : 0, s(w.initiated), s(w.started), s(w.body_start), s(w.posted),
                       s(w.received), s(w.scan), s(w.exchange), w.rows_scanned, w.bytes);
  return out;
}

Json QueryReport::to_json() const {
  return {{"query", query},
          {"workers", workers},
          {"files", files},
          {"memory_mib", memory_mib},
          {"latency_s", s(latency)},
          {"phases",
           {{"invoke_s", s(last_initiated)},
            {"last_posted_s", s(last_posted)},
            {"last_received_s", s(last_received)},
            {"collect_s", s(collect)}}},
          {"rows_scanned", rows_scanned},
          {"bytes", bytes},
          {"spilled", spilled},
          {"requests", {{"reads", usage.reads}, {"writes", usage.writes}, {"lists", usage.lists}}},
          {"usd",
           {{"request", usage.request_usd.to_plain_string()},
            {"worker", usage.worker_usd.to_plain_string()},
            {"total", total_usd().to_plain_string()}}}};
}

Engine::Engine(sim::Cloud& cloud, sim::FunctionSpec spec)
    : cloud_(cloud), spec_(std::move(spec)), launcher_(cloud.faas(), spec_.name) {
  WorkerServices services{cloud_.store(), cloud_.queues(), cloud_.ledger().prices()};
  launcher_.register_function(spec_, [services](sim::WorkerContext& ctx, std::uint64_t, const sim::Bytes& payload) {
    return run_worker(services, ctx, payload);
  });
}

sim::Task<QueryOutcome> Engine::run(LogicalPlan plan, ExecOptions options) {
  auto& sim = cloud_.sim();
  const sim::SimTime t0 = sim.now();
  const sim::UsageTotals before = cloud_.ledger().totals();
  plan.validate();
  options.scan.validate();
  const auto& files = plan.scan().keys;
  if (files.empty()) throw Error(ErrorKind::kInvalidArgument, "query has no input files");
  if (options.files_per_worker == 0) throw Error(ErrorKind::kInvalidArgument, "files per worker must be positive");
  const std::uint64_t workers = (files.size() + options.files_per_worker - 1) / options.files_per_worker;
  const std::uint64_t query = next_query_++;

  Json pipeline = plan.serverless_json();
  for (auto& op : pipeline) {
    if (op.at("op") != op_name(OpKind::kExchange)) continue;
    op["body"]["exchange_id"] = query;
    exchange::NamingScheme naming = plan.exchange()->config.naming;
    naming.exchange_id = query;
    exchange::create_buckets(cloud_.store(), naming);
  }
  const std::string queue_name = fmt::format("lambada-results-q{}", query);
  auto& queue = cloud_.queues().create(queue_name);
  if (!cloud_.store().has_bucket(options.spill_bucket)) cloud_.store().create_bucket(options.spill_bucket);

  auto payloads = [&](std::uint64_t w) {
    PlanFragment f;
    f.query = query;
    f.worker = w;
    f.workers = workers;
    const std::size_t begin = w * options.files_per_worker;
    const std::size_t end = std::min<std::size_t>(files.size(), begin + options.files_per_worker);
    f.files.assign(files.begin() + static_cast<std::ptrdiff_t>(begin), files.begin() + static_cast<std::ptrdiff_t>(end));
    f.pipeline = pipeline;
    f.result_queue = queue_name;
    f.spill_bucket = options.spill_bucket;
    f.scan = options.scan;
    return f.encode();
  };
  const sim::Duration launch_offset = sim.now() - t0;
  co_await launcher_.launch(invoke::build_plan(workers, options.strategy, payloads));

  std::vector<std::optional<WorkerResult>> results(workers);
  std::vector<sim::Duration> received(workers);
  std::uint64_t heard = 0;
  while (heard < workers) {
    auto batch = co_await queue.poll_batch(options.result_timeout);
    for (const auto& msg : batch) {
      WorkerResult r = WorkerResult::decode(msg.body);
      if (r.query != query || r.worker >= workers || results[r.worker]) continue;
      received[r.worker] = sim.now() - t0;
      results[r.worker] = std::move(r);
      ++heard;
    }
  }
  const sim::Duration last_received = sim.now() - t0;

  for (std::uint64_t w = 0; w < workers; ++w) {
    const auto& r = *results[w];
    if (!r.ok) throw Error(ErrorKind::kWorkerError, fmt::format("worker {}: {}: {}", w, r.error_kind, r.message));
  }

  QueryOutcome out;
  QueryReport& rep = out.report;
  for (auto& r : results) {
    if (!r->spill_key) continue;
    auto got = co_await cloud_.store().get(cloud_.driver(), options.spill_bucket, *r->spill_key);
    r->payload = Json::parse(got.data.begin(), got.data.end());
    ++rep.spilled;
  }
  const lcf::Schema schema = stage_schema(plan);
  if (const AggregateOp* agg = plan.aggregate()) {
    GroupTable merged(agg->keys, agg->aggs, schema);
    for (const auto& r : results) merged.merge_json(*r->payload);
    out.result = merged.finalize();
  } else {
    std::vector<lcf::Table> parts;
    for (const auto& r : results) parts.push_back(table_from_json(*r->payload, schema));
    out.result = rows_result(schema, lcf::concat(parts));
  }
  rep.latency = sim.now() - t0;
  rep.collect = rep.latency - last_received;
  rep.last_received = last_received;

  co_await launcher_.wait_all();
  const auto launches = launcher_.report();
  rep.query = query;
  rep.workers = workers;
  rep.files = files.size();
  rep.memory_mib = spec_.memory_mib;
  rep.last_initiated = launch_offset + launches.last_initiated;
  for (std::uint64_t w = 0; w < workers; ++w) {
    const auto& r = *results[w];
    const auto& l = launches.workers.at(w);
    WorkerPhase p;
    p.worker = w;
    p.generation = l.generation;
    p.cold = l.cold;
    p.ok = r.ok;
    p.initiated = launch_offset + l.initiated;
    p.started = launch_offset + l.started;
    p.body_start = r.metrics.body_start - t0.time_since_epoch();
    p.posted = p.body_start + r.metrics.fragment;
    p.received = received[w];
    p.scan = r.metrics.scan;
    p.exchange = r.metrics.exchange;
    p.rows_scanned = r.metrics.rows_scanned;
    p.bytes = r.metrics.bytes;
    rep.last_posted = std::max(rep.last_posted, p.posted);
    rep.rows_scanned += p.rows_scanned;
    rep.bytes += p.bytes;
    rep.per_worker.push_back(p);
  }
  rep.usage = cloud_.ledger().totals() - before;
  co_return out;
}

QueryOutcome Engine::execute(const LogicalPlan& plan, const ExecOptions& options) {
  struct State {
    QueryOutcome out;
    std::exception_ptr error;
  } state;
  auto body = [](Engine* self, State* st, LogicalPlan p, ExecOptions o) -> sim::Task<void> {
    try {
      st->out = co_await self->run(std::move(p), std::move(o));
    } catch (...) {
      st->error = std::current_exception();
    }
  };
  cloud_.sim().spawn(body(this, &state, plan, options));
  cloud_.sim().run();
  if (state.error) std::rethrow_exception(state.error);
  return std::move(state.out);
}

}  // namespace lambada::engine
