#include "lambada/scan/scan.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>

#include "lambada/lcf/codec.hpp"
#include "lambada/lcf/reader.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::scan {

BatchSink collect_into(std::vector<ScanBatch>& out) {
  return [&out](ScanBatch b) -> sim::Task<void> {
    out.push_back(std::move(b));
    co_return;
  };
}

std::string ScanReport::csv_header() {
  return "files,row_groups,row_groups_scanned,rows_scanned,rows_emitted,requests,footer_requests,bytes,duration_s,"
         "request_usd,worker_usd";
}

std::string ScanReport::csv_row() const {
  return fmt::format("{},{},{},{},{},{},{},{},{:.6f},{},{}", files, row_groups, row_groups_scanned, rows_scanned,
                     rows_emitted, requests, footer_requests, bytes, sim::to_seconds(duration),
                     request_usd.to_string(12), worker_usd.to_string(12));
}

lcf::Schema output_schema(const lcf::Schema& file_schema, const PredicateSet& preds) {
  std::vector<lcf::ColumnDef> cols;
  for (std::size_t c : preds.bind_projection(file_schema)) cols.push_back(file_schema[c]);
  return lcf::Schema(std::move(cols));
}

namespace {


struct MetadataState {
  explicit MetadataState(sim::Simulator& sim, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) done.push_back(std::make_unique<sim::Signal>(sim));
    footers.resize(n);
  }
  std::vector<std::unique_ptr<sim::Signal>> done;
  std::vector<lcf::FooterFetch> footers;
  std::exception_ptr error;
};

sim::Task<void> prefetch_footers(ScanEnv env, std::string bucket, std::vector<std::string> keys, std::uint64_t window,
                                 std::shared_ptr<MetadataState> state) {
  std::size_t i = 0;
  try {
    for (; i < keys.size(); ++i) {
      state->footers[i] = co_await lcf::fetch_footer(env.store, env.node, bucket, keys[i], window);
      state->done[i]->set();
    }
  } catch (...) {
    state->error = std::current_exception();
  }
  for (; i < keys.size(); ++i) state->done[i]->set();
}

// Download state of one file: a group's requests may start once it is
// admitted to the prefetch window; it is done when all of them returned.
struct FileDownload {
  FileDownload(sim::Simulator& sim, const DownloadPlan& plan) {
    for (std::size_t pos = 0; pos < plan.groups.size(); ++pos) {
      admitted.push_back(std::make_unique<sim::Signal>(sim));
      done.push_back(std::make_unique<sim::Signal>(sim));
      position[plan.groups[pos]] = pos;
    }
    pending.assign(plan.groups.size(), 0);
    chunks.resize(plan.groups.size());
    logical_bytes.assign(plan.groups.size(), 0);
    requests.assign(plan.groups.size(), 0);
    for (const auto& r : plan.requests)
      if (r.level != Level::kFiles) ++pending[position.at(r.group)];
  }

  void fail(std::exception_ptr e) {
    if (!error) error = e;
    for (auto& s : admitted)
      if (!s->is_set()) s->set();
    for (auto& s : done)
      if (!s->is_set()) s->set();
  }

  std::map<std::size_t, std::size_t> position;  // group -> position in scan order
  std::vector<std::unique_ptr<sim::Signal>> admitted;
  std::vector<std::unique_ptr<sim::Signal>> done;
  std::vector<std::size_t> pending;
  std::vector<std::map<std::size_t, sim::Bytes>> chunks;  // column -> compressed bytes
  std::vector<std::uint64_t> logical_bytes;
  std::vector<std::uint64_t> requests;
  std::exception_ptr error;
};

sim::Task<void> serve_connection(ScanEnv env, std::string bucket, std::string key, std::vector<PlannedRequest> reqs,
                                 std::shared_ptr<const lcf::FileFooter> footer, std::shared_ptr<FileDownload> state) {
  try {
    for (const auto& r : reqs) {
      const std::size_t pos = state->position.at(r.group);
      co_await state->admitted[pos]->wait();
      if (state->error) co_return;
      auto got = co_await env.store.get(env.node, bucket, key, sim::ByteRange::span(r.offset, r.length));
      if (state->error) co_return;
      if (got.data.size() != r.length) throw Error(ErrorKind::kCorruptChunk, "short read of a column chunk");
      const auto& meta = footer->row_groups[r.group].columns[r.column];
      auto& dst = state->chunks[pos][r.column];
      std::memcpy(dst.data() + (r.offset - meta.offset), got.data.data(), got.data.size());
      state->logical_bytes[pos] += got.receipt.logical_bytes;
      ++state->requests[pos];
      if (--state->pending[pos] == 0) state->done[pos]->set();
    }
  } catch (...) {
    state->fail(std::current_exception());
  }
}

double decode_ns_per_byte(const ScanConfig& config, std::uint8_t encoding) {
  if (encoding == lcf::encoding::kPlain || encoding == lcf::encoding::kRle) return config.light_decode_ns_per_byte;
  if (config.codec_decode_ns_per_byte) return *config.codec_decode_ns_per_byte;
  const lcf::Codec* codec = lcf::CodecRegistry::global().find(encoding);
  return codec ? codec->decode_ns_per_byte : 0.0;
}

}  // namespace

sim::Task<ScanReport> execute_scan(ScanEnv env, std::string bucket, std::vector<std::string> keys, PredicateSet preds,
                                   ScanConfig config, BatchSink sink) {
  co_return co_await execute_scan(env, std::move(bucket), std::move(keys), std::move(preds), std::move(config),
                                  std::move(sink), nullptr);
}

sim::Task<ScanReport> execute_scan(ScanEnv env, std::string bucket, std::vector<std::string> keys, PredicateSet preds,
                                   ScanConfig config, BatchSink sink, PlanLog* log) {
  config.validate();
  sim::Simulator& sim = env.node.sim();
  const sim::SimTime t0 = sim.now();
  ScanReport report;
  report.files = keys.size();

  auto meta = std::make_shared<MetadataState>(sim, keys.size());
  sim::JoinHandle meta_task;
  if (config.metadata_prefetch && !keys.empty())
    meta_task = sim.spawn(prefetch_footers(env, bucket, keys, config.footer_tail_window, meta));

  std::optional<lcf::Schema> schema;
  for (std::size_t f = 0; f < keys.size(); ++f) {
    if (config.metadata_prefetch) {
      co_await meta->done[f]->wait();
      if (meta->error) std::rethrow_exception(meta->error);
    } else {
      meta->footers[f] = co_await lcf::fetch_footer(env.store, env.node, bucket, keys[f], config.footer_tail_window);
    }
    const lcf::FooterFetch& fetched = meta->footers[f];
    report.footer_requests += static_cast<std::uint64_t>(fetched.requests);
    const sim::Scale scale = env.store.scale_of(bucket, keys[f]).value_or(sim::Scale{});
    report.bytes += fetched.bytes;
    auto footer = std::make_shared<const lcf::FileFooter>(fetched.footer);
    if (!schema) schema = footer->schema;
    if (footer->schema != *schema)
      throw Error(ErrorKind::kTypeMismatch, fmt::format("'{}' has a different schema than '{}'", keys[f], keys[0]));

    const auto bound = preds.bind(footer->schema);
    const auto projection = preds.bind_projection(footer->schema);
    std::vector<std::size_t> needed = projection;
    for (const auto& p : bound) needed.push_back(p.column);
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

    std::vector<std::size_t> groups;
    if (config.prune) {
      groups = prune_row_groups(*footer, bound);
    } else {
      for (std::size_t g = 0; g < footer->row_groups.size(); ++g) groups.push_back(g);
    }
    report.row_groups += footer->row_groups.size();
    report.row_groups_scanned += groups.size();

    const std::uint64_t budget = env.node.memory_budget();
    const std::uint64_t available = budget > env.node.memory_in_use() ? budget - env.node.memory_in_use() : 0;
    auto plan = std::make_shared<const DownloadPlan>(
        plan_downloads(*footer, fetched.file_size, groups, needed, config, available, scale));
    if (log) {
      log->keys.push_back(keys[f]);
      log->plans.push_back(*plan);
    }
    if (groups.empty()) continue;

    auto group_bytes = [&](std::size_t pos) {
      std::uint64_t n = 0;
      for (std::size_t c : needed) n += footer->row_groups[groups[pos]].columns[c].compressed_len;
      return n * scale.factor;
    };
    auto state = std::make_shared<FileDownload>(sim, *plan);
    auto admit = [&](std::size_t pos) {
      env.node.allocate(group_bytes(pos));
      for (std::size_t c : needed)
        state->chunks[pos][c].resize(footer->row_groups[groups[pos]].columns[c].compressed_len);
      state->admitted[pos]->set();
    };
    std::vector<sim::JoinHandle> connections;
    for (int slot = 1; slot <= plan->connections; ++slot) {
      auto reqs = plan->slot_requests(slot);
      if (!reqs.empty())
        connections.push_back(sim.spawn(serve_connection(env, bucket, keys[f], std::move(reqs), footer, state)));
    }
    const std::size_t lanes = static_cast<std::size_t>(plan->lanes);
    for (std::size_t pos = 0; pos < std::min(lanes, groups.size()); ++pos) admit(pos);

    for (std::size_t pos = 0; pos < groups.size(); ++pos) {
      co_await state->done[pos]->wait();
      if (state->error) std::rethrow_exception(state->error);
      report.requests += state->requests[pos];
      report.bytes += state->logical_bytes[pos];
      auto chunks = std::move(state->chunks[pos]);

      const std::size_t g = groups[pos];
      const auto& rg = footer->row_groups[g];
      lcf::Table table;
      for (std::size_t c = 0; c < footer->schema.size(); ++c) {
        if (footer->schema[c].type == lcf::ColumnType::kInt64) table.columns.emplace_back(std::vector<std::int64_t>{});
        else table.columns.emplace_back(std::vector<double>{});
      }
      double cpu_ns = 0;
      for (std::size_t c : needed) {
        const auto& m = rg.columns[c];
        table.columns[c] = lcf::decode_chunk(m, footer->schema[c].type, rg.row_count, chunks.at(c));
        cpu_ns += decode_ns_per_byte(config, m.encoding) * static_cast<double>(m.uncompressed_len * scale.factor);
      }
      if (cpu_ns > 0) co_await env.node.compute(cpu_ns * 1e-9, config.decompress_threads);
      env.node.release(group_bytes(pos));
      if (pos + lanes < groups.size()) admit(pos + lanes);

      const std::size_t rows = static_cast<std::size_t>(rg.row_count);
      const auto selection = filter_rows(table, rows, bound);
      ScanBatch batch{f, g, gather(table, projection, selection, rows)};
      report.rows_scanned += rows;
      report.rows_emitted += batch.table.rows();
      if (sink) co_await sink(std::move(batch));
    }
    for (auto& h : connections) co_await sim::Simulator::join(h);
  }
  if (meta_task) co_await sim::Simulator::join(meta_task);

  report.requests += report.footer_requests;
  report.duration = sim.now() - t0;
  report.request_usd = env.prices.per_read() * static_cast<std::int64_t>(report.requests);
  report.worker_usd = env.prices.per_mib_microsecond() * (env.node.memory_mib() * report.duration.count());
  co_return report;
}

double DownloadReport::mib_per_s() const {
  const double s = sim::to_seconds(duration);
  return s > 0 ? static_cast<double>(bytes) / (1024.0 * 1024.0) / s : 0.0;
}

sim::Task<DownloadReport> download_object(ScanEnv env, std::string bucket, std::string key, std::uint64_t chunk_size,
                                          int connections) {
  if (chunk_size == 0 || connections < 1)
    throw Error(ErrorKind::kInvalidArgument, "chunk size and connections must be positive");
  const auto size = env.store.object_size(bucket, key);
  if (!size) throw Error(ErrorKind::kNotFound, fmt::format("{}/{}", bucket, key));
  const std::uint32_t scale = env.store.scale_of(bucket, key)->factor;
  if (chunk_size % scale != 0)
    throw Error(ErrorKind::kInvalidArgument, "chunk size must be a multiple of the object's scale");
  const std::uint64_t piece = chunk_size / scale;
  const std::uint64_t n = (*size + piece - 1) / piece;

  sim::Simulator& sim = env.node.sim();
  const sim::SimTime t0 = sim.now();
  DownloadReport report;
  std::uint64_t next = 0;
  auto lane = [&]() -> sim::Task<void> {
    while (next < n) {
      const std::uint64_t i = next++;
      const std::uint64_t off = i * piece;
      auto got = co_await env.store.get(env.node, bucket, key, sim::ByteRange::span(off, std::min(piece, *size - off)));
      report.bytes += got.receipt.logical_bytes;
      ++report.requests;
    }
  };
  std::vector<sim::Task<void>> lanes;
  for (int c = 0; c < connections; ++c) lanes.push_back(lane());
  co_await sim.when_all(std::move(lanes));
  report.duration = sim.now() - t0;
  report.request_usd = env.prices.per_read() * static_cast<std::int64_t>(report.requests);
  co_return report;
}

}  // namespace lambada::scan
