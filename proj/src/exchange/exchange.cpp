#include "lambada/exchange/exchange.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::exchange {

namespace {

using sim::Duration;
using sim::Task;

using LaneBody = std::function<Task<void>(std::size_t item, std::size_t lane)>;

Task<void> lane_loop(std::shared_ptr<std::size_t> next, std::size_t count, std::size_t lane, LaneBody body) {
  while (*next < count) {
    const std::size_t i = (*next)++;
    co_await body(i, lane);
  }
}

// Runs body(0..count) on at most `lanes` concurrent lanes, each taking the next item when free.
Task<void> run_lanes(sim::Simulator& sim, std::size_t count, std::size_t lanes, LaneBody body) {
  auto next = std::make_shared<std::size_t>(0);
  std::vector<Task<void>> tasks;
  for (std::size_t l = 0; l < std::min(lanes, count); ++l) tasks.push_back(lane_loop(next, count, l, body));
  co_await sim.when_all(std::move(tasks));
}

struct Poll {
  Duration interval;
  int attempts;
};

// GETs an object, retrying while it does not exist yet; time lost to misses is added to *waited.
Task<sim::GetResult> poll_get(sim::ObjectStore& store, sim::Node& node, ObjectName name, sim::ByteRange range, Poll poll,
                              Duration* waited) {
  auto& sim = node.sim();
  for (int attempt = 1;; ++attempt) {
    const auto t0 = sim.now();
    auto r = co_await store.try_get(node, name.bucket, name.key, range);
    if (r) co_return std::move(*r);
    if (attempt >= poll.attempts) {
      throw Error(ErrorKind::kTimeout,
                  fmt::format("{}/{} still missing after {} attempts", name.bucket, name.key, attempt));
    }
    co_await sim.sleep_for(poll.interval);
    *waited += sim.now() - t0;
  }
}

std::vector<std::uint8_t> text_bytes(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<std::uint64_t> parse_offsets_object(const sim::Bytes& data, std::size_t parts, const ObjectName& name) {
  auto offsets = decode_offsets(std::string(data.begin(), data.end()));
  if (!offsets || offsets->size() != parts + 1) {
    throw Error(ErrorKind::kCorruptChunk, fmt::format("{}/{}: malformed offsets", name.bucket, name.key));
  }
  return *offsets;
}

struct Put {
  ObjectName name;
  sim::Bytes data;
  std::uint32_t scale = 1;
  std::optional<ObjectName> offsets_name;  // written after the data
  sim::Bytes offsets;
};

// One part a role has to fetch from one sender.
struct Fetch {
  std::size_t role_slot = 0;
  std::size_t sender_index = 0;
  std::uint64_t sender = 0;
};

}  // namespace

void ExchangeConfig::validate() const {
  if (levels < 1 || levels > 3) throw Error(ErrorKind::kInvalidArgument, "levels must be 1..3");
  if (naming.buckets < 1) throw Error(ErrorKind::kInvalidArgument, "at least one bucket is required");
  if (scale < 1) throw Error(ErrorKind::kInvalidArgument, "scale must be at least 1");
  if (connections < 1) throw Error(ErrorKind::kInvalidArgument, "connections must be at least 1");
  if (poll_attempts < 1) throw Error(ErrorKind::kInvalidArgument, "poll_attempts must be at least 1");
  if (partition_ns_per_byte < 0) throw Error(ErrorKind::kInvalidArgument, "partition cost must be non-negative");
}

std::string PhaseTrace::csv_header() {
  return "worker,level,partition_s,write_s,wait_s,read_s,bytes_sent,bytes_received,records_sent,records_received";
}

std::string PhaseTrace::csv_row() const {
  return fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{},{},{}", worker, level, sim::to_seconds(partition),
                     sim::to_seconds(write), sim::to_seconds(wait), sim::to_seconds(read), bytes_sent, bytes_received,
                     records_sent, records_received);
}

void create_buckets(sim::ObjectStore& store, const NamingScheme& naming) {
  for (const auto& b : naming.all_buckets()) {
    if (!store.has_bucket(b)) store.create_bucket(b);
  }
}

Task<ExchangeOutput> run_exchange(ExchangeEnv env, std::uint64_t worker, std::uint64_t workers, ExchangeConfig config,
                                  std::vector<Record> input, Partitioner partitioner) {
  config.validate();
  const Grid grid(workers, config.levels, config.side);
  if (worker >= workers) throw Error(ErrorKind::kInvalidArgument, fmt::format("worker {} of {}", worker, workers));
  auto& sim = env.node.sim();
  const auto& naming = config.naming;
  const Poll poll{config.poll_interval, config.poll_attempts};
  const std::size_t lanes = static_cast<std::size_t>(config.connections);

  const std::vector<std::uint64_t> roles = grid.roles_of(worker);
  std::vector<std::vector<Record>> held(roles.size());
  held[0] = std::move(input);

  ExchangeOutput out;
  for (int level = 0; level < config.levels; ++level) {
    PhaseTrace trace;
    trace.worker = worker;
    trace.level = level;
    const std::uint64_t width = grid.dim(level);

    // Partition every role's records by this level's digit of their owner.
    auto t0 = sim.now();
    std::vector<std::vector<sim::Bytes>> parts(roles.size(), std::vector<sim::Bytes>(width));
    std::uint64_t stored_sent = 0;
    for (std::size_t i = 0; i < roles.size(); ++i) {
      for (const auto& r : held[i]) {
        const std::uint64_t d = grid.digit(owner(partitioner, r.key, workers), level);
        encode_append(parts[i][d], r);
        ++trace.records_sent;
      }
      for (const auto& p : parts[i]) stored_sent += p.size();
      held[i].clear();
    }
    trace.bytes_sent = stored_sent * config.scale;
    const double cpu = static_cast<double>(trace.bytes_sent) * config.partition_ns_per_byte * 1e-9;
    if (cpu > 0) co_await env.node.compute(cpu);
    trace.partition = sim.now() - t0;

    // Write.
    t0 = sim.now();
    std::vector<Put> puts;
    for (std::size_t i = 0; i < roles.size(); ++i) {
      const std::uint64_t role = roles[i];
      const std::uint64_t group = grid.group(role, level);
      const std::uint64_t my_digit = grid.digit(role, level);
      const auto members = grid.members(role, level);
      if (config.write_combining == WriteCombining::kOff) {
        for (std::uint64_t d = 0; d < width; ++d) {
          puts.push_back({naming.partition(level, group, width, role, members[d], d), std::move(parts[i][d]),
                          config.scale, std::nullopt, {}});
        }
        continue;
      }
      std::vector<std::uint64_t> sizes;
      sim::Bytes data;
      for (auto& p : parts[i]) {
        sizes.push_back(p.size());
        data.insert(data.end(), p.begin(), p.end());
      }
      const auto offsets = part_offsets(sizes);
      if (config.write_combining == WriteCombining::kOffsetsInName) {
        puts.push_back({naming.combined_with_offsets(level, group, role, offsets), std::move(data), config.scale,
                        std::nullopt, {}});
      } else {
        puts.push_back({naming.combined(level, group, width, role, my_digit), std::move(data), config.scale,
                        naming.offsets(level, group, width, role, my_digit), text_bytes(encode_offsets(offsets))});
      }
    }
    co_await run_lanes(sim, puts.size(), lanes, [&](std::size_t i, std::size_t) -> Task<void> {
      auto& p = puts[i];
      co_await env.store.put(env.node, p.name.bucket, p.name.key, std::move(p.data), sim::Scale(p.scale));
      if (p.offsets_name) co_await env.store.put(env.node, p.offsets_name->bucket, p.offsets_name->key, std::move(p.offsets));
    });
    trace.write = sim.now() - t0;

    // Receive.
    t0 = sim.now();
    std::vector<Duration> lane_wait(lanes, Duration{0});
    std::vector<Fetch> fetches;
    std::vector<std::vector<std::vector<Record>>> received(roles.size(), std::vector<std::vector<Record>>(width));
    // offsets_in_name: per role, sender -> key and offsets found by listing.
    std::vector<std::map<std::uint64_t, NamedFile>> listed(roles.size());
    std::vector<std::string> listed_keys_prefix(roles.size());

    if (config.write_combining == WriteCombining::kOffsetsInName) {
      co_await run_lanes(sim, roles.size(), lanes, [&](std::size_t i, std::size_t lane) -> Task<void> {
        const std::uint64_t role = roles[i];
        const std::uint64_t group = grid.group(role, level);
        const std::string prefix = naming.group_prefix(level, group);
        const std::string bucket = naming.named_bucket(group);
        for (int attempt = 1;; ++attempt) {
          const auto l0 = sim.now();
          const auto keys = co_await env.store.list(env.node, bucket, prefix);
          for (const auto& k : keys) {
            if (auto f = parse_named_key(k, prefix)) listed[i][f->sender] = std::move(*f);
          }
          if (listed[i].size() >= width) break;
          if (attempt >= poll.attempts) {
            throw Error(ErrorKind::kTimeout, fmt::format("{}/{}: {} of {} senders visible after {} lists", bucket,
                                                         prefix, listed[i].size(), width, attempt));
          }
          co_await sim.sleep_for(poll.interval);
          lane_wait[lane] += sim.now() - l0;
        }
      });
    }

    for (std::size_t i = 0; i < roles.size(); ++i) {
      const auto members = grid.members(roles[i], level);
      for (std::size_t j = 0; j < members.size(); ++j) fetches.push_back({i, j, members[j]});
    }
    std::uint64_t logical_received = 0;
    co_await run_lanes(sim, fetches.size(), lanes, [&](std::size_t n, std::size_t lane) -> Task<void> {
      const Fetch f = fetches[n];
      const std::uint64_t role = roles[f.role_slot];
      const std::uint64_t group = grid.group(role, level);
      const std::uint64_t my_digit = grid.digit(role, level);
      sim::GetResult got;
      switch (config.write_combining) {
        case WriteCombining::kOff:
          got = co_await poll_get(env.store, env.node, naming.partition(level, group, width, f.sender, role, my_digit),
                                  sim::ByteRange::full(), poll, &lane_wait[lane]);
          break;
        case WriteCombining::kOffsetsFile: {
          const auto oname = naming.offsets(level, group, width, f.sender, f.sender_index);
          auto o = co_await poll_get(env.store, env.node, oname, sim::ByteRange::full(), poll, &lane_wait[lane]);
          const auto offsets = parse_offsets_object(o.data, width, oname);
          const auto dname = naming.combined(level, group, width, f.sender, f.sender_index);
          got = co_await env.store.get(env.node, dname.bucket, dname.key,
                                       sim::ByteRange::span(offsets[my_digit], offsets[my_digit + 1] - offsets[my_digit]));
          break;
        }
        case WriteCombining::kOffsetsInName: {
          const NamedFile& nf = listed[f.role_slot].at(f.sender);
          if (nf.offsets.size() != width + 1) {
            throw Error(ErrorKind::kCorruptChunk, fmt::format("sender {} named {} offsets for {} parts", f.sender,
                                                              nf.offsets.size(), width));
          }
          const auto name = naming.combined_with_offsets(level, group, f.sender, nf.offsets);
          got = co_await env.store.get(env.node, name.bucket, name.key,
                                       sim::ByteRange::span(nf.offsets[my_digit],
                                                            nf.offsets[my_digit + 1] - nf.offsets[my_digit]));
          break;
        }
      }
      logical_received += got.receipt.logical_bytes;
      received[f.role_slot][f.sender_index] = decode(got.data);
    });
    const Duration receive = sim.now() - t0;
    trace.wait = std::min(receive, *std::max_element(lane_wait.begin(), lane_wait.end()));
    trace.read = receive - trace.wait;
    trace.bytes_received = logical_received;
    for (std::size_t i = 0; i < roles.size(); ++i) {
      for (auto& part : received[i]) {
        trace.records_received += part.size();
        std::move(part.begin(), part.end(), std::back_inserter(held[i]));
      }
    }
    out.trace.push_back(trace);
  }

  out.records = std::move(held[0]);
  for (std::size_t i = 1; i < held.size(); ++i) {
    if (!held[i].empty()) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("virtual role {} kept {} records", roles[i], held[i].size()));
    }
  }
  co_return out;
}

namespace {

Task<std::vector<Record>> download_input(ExchangeEnv env, std::string bucket, std::string key, int connections) {
  const auto size = env.store.object_size(bucket, key);
  if (!size) throw Error(ErrorKind::kNotFound, bucket + "/" + key);
  const auto n = static_cast<std::uint64_t>(connections);
  const std::uint64_t piece = std::max<std::uint64_t>(1, (*size + n - 1) / n);
  const std::size_t pieces = *size == 0 ? 1 : static_cast<std::size_t>((*size + piece - 1) / piece);
  std::vector<sim::Bytes> chunks(pieces);
  co_await run_lanes(env.node.sim(), pieces, pieces, [&](std::size_t i, std::size_t) -> Task<void> {
    const std::uint64_t off = i * piece;
    const std::uint64_t len = std::min(piece, *size - off);
    auto r = co_await env.store.get(env.node, bucket, key, sim::ByteRange::span(off, len));
    chunks[i] = std::move(r.data);
  });
  sim::Bytes all;
  for (auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  co_return decode(all);
}

}  // namespace

std::string ExchangeJobResult::trace_csv() const {
  std::string out = PhaseTrace::csv_header() + "\n";
  for (const auto& t : trace) out += t.csv_row() + "\n";
  return out;
}

std::string ExchangeJobResult::workers_csv() const {
  std::string out = "worker,start_s,input_s,finish_s\n";
  for (const auto& w : workers) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f}\n", w.worker, sim::to_seconds(w.start), sim::to_seconds(w.input),
                       sim::to_seconds(w.finish));
  }
  return out;
}

ExchangeJobResult simulate_exchange(sim::Cloud& cloud, const ExchangeJob& job, std::vector<std::vector<Record>> inputs) {
  job.config.validate();
  const std::uint64_t P = job.workers;
  if (P < 1) throw Error(ErrorKind::kInvalidArgument, "an exchange needs at least one worker");
  if (!job.input_bucket && inputs.size() != P) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("{} inputs for {} workers", inputs.size(), P));
  }
  if (!job.start_at.empty() && job.start_at.size() != P) {
    throw Error(ErrorKind::kInvalidArgument, "start_at needs one entry per worker");
  }
  inputs.resize(P);
  create_buckets(cloud.store(), job.config.naming);

  auto& sim = cloud.sim();
  const auto before = cloud.ledger().totals();
  const auto& faas = cloud.config().faas;
  std::vector<std::unique_ptr<sim::Node>> nodes;
  ExchangeJobResult result;
  result.outputs.resize(P);
  result.workers.resize(P);
  std::vector<std::vector<PhaseTrace>> traces(P);
  std::vector<sim::JoinHandle> handles;
  const sim::SimTime origin = sim.now();

  for (std::uint64_t w = 0; w < P; ++w) {
    nodes.push_back(std::make_unique<sim::Node>(sim, fmt::format("xchg#{}", w), faas.worker_ingress, faas.worker_egress,
                                                job.memory_mib, faas.memory_budget_fraction));
    auto body = [](sim::Cloud& cloud, const ExchangeJob& job, sim::Node& node, std::uint64_t w,
                   std::vector<Record> input, ExchangeJobResult& result,
                   std::vector<PhaseTrace>& trace, sim::SimTime origin) -> Task<void> {
      auto& sim = cloud.sim();
      if (!job.start_at.empty()) co_await sim.sleep_until(origin + job.start_at[w]);
      const auto start = sim.now();
      ExchangeEnv env{cloud.store(), node};
      if (job.input_bucket) {
        input = co_await download_input(env, *job.input_bucket, job.input_prefix + std::to_string(w),
                                        job.config.connections);
      }
      const auto input_done = sim.now();
      auto out = co_await run_exchange(env, w, job.workers, job.config, std::move(input), job.partitioner);
      result.outputs[w] = std::move(out.records);
      trace = std::move(out.trace);
      result.workers[w] = {w, start - origin, input_done - start, sim.now() - origin};
      cloud.ledger().charge_worker(job.memory_mib, sim.now() - start);
    };
    handles.push_back(sim.spawn(body(cloud, job, *nodes.back(), w, std::move(inputs[w]), result, traces[w], origin)));
  }
  sim.run();
  for (auto& h : handles) {
    if (h->error) std::rethrow_exception(h->error);
  }
  for (auto& t : traces) std::move(t.begin(), t.end(), std::back_inserter(result.trace));
  for (const auto& w : result.workers) result.makespan = std::max(result.makespan, w.finish);
  result.usage = cloud.ledger().totals() - before;
  return result;
}

}  // namespace lambada::exchange
