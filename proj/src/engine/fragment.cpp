#include "lambada/engine/fragment.hpp"

#include "lambada/sim/error.hpp"

namespace lambada::engine {
namespace {

sim::Bytes to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

Json parse(const sim::Bytes& b, const char* what) {
  try {
    return Json::parse(b.begin(), b.end());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + ": " + e.what());
  }
}

}  // namespace

sim::Bytes PlanFragment::encode() const {
  Json s = {{"chunk", scan.chunk_size_bytes},
            {"connections", scan.max_connections},
            {"prefetch", scan.row_group_prefetch},
            {"metadata_prefetch", scan.metadata_prefetch},
            {"threads", scan.decompress_threads},
            {"tail", scan.footer_tail_window},
            {"light_ns", scan.light_decode_ns_per_byte},
            {"prune", scan.prune}};
  if (scan.codec_decode_ns_per_byte) s["codec_ns"] = *scan.codec_decode_ns_per_byte;
  Json j = {{"query", query},       {"worker", worker}, {"workers", workers},      {"files", files},
            {"pipeline", pipeline}, {"queue", result_queue}, {"spill", spill_bucket}, {"scan", s}};
  return to_bytes(j.dump());
}

PlanFragment PlanFragment::decode(const sim::Bytes& payload) {
  Json j = parse(payload, "malformed fragment");
  try {
    PlanFragment f;
    f.query = j.at("query").get<std::uint64_t>();
    f.worker = j.at("worker").get<std::uint64_t>();
    f.workers = j.at("workers").get<std::uint64_t>();
    f.files = j.at("files").get<std::vector<std::string>>();
    f.pipeline = j.at("pipeline");
    f.result_queue = j.at("queue").get<std::string>();
    f.spill_bucket = j.at("spill").get<std::string>();
    const auto& s = j.at("scan");
    f.scan.chunk_size_bytes = s.at("chunk").get<std::uint64_t>();
    f.scan.max_connections = s.at("connections").get<int>();
    f.scan.row_group_prefetch = s.at("prefetch").get<int>();
    f.scan.metadata_prefetch = s.at("metadata_prefetch").get<bool>();
    f.scan.decompress_threads = s.at("threads").get<int>();
    f.scan.footer_tail_window = s.at("tail").get<std::uint64_t>();
    f.scan.light_decode_ns_per_byte = s.at("light_ns").get<double>();
    f.scan.prune = s.at("prune").get<bool>();
    if (s.contains("codec_ns")) f.scan.codec_decode_ns_per_byte = s.at("codec_ns").get<double>();
    return f;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed fragment: ") + e.what());
  }
}

sim::Bytes WorkerResult::encode() const {
  Json j = {{"query", query},
            {"worker", worker},
            {"ok", ok},
            {"metrics",
             {metrics.rows_scanned, metrics.rows_emitted, metrics.bytes, metrics.scan.count(),
              metrics.exchange.count(), metrics.fragment.count(), metrics.body_start.count()}}};
  if (!ok) {
    j["error"] = error_kind;
    j["message"] = message;
  }
  if (payload) j["payload"] = *payload;
  if (spill_key) j["spill_key"] = *spill_key;
  return to_bytes(j.dump());
}

WorkerResult WorkerResult::decode(const sim::Bytes& body) {
  Json j = parse(body, "malformed worker result");
  try {
    WorkerResult r;
    r.query = j.at("query").get<std::uint64_t>();
    r.worker = j.at("worker").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    if (!r.ok) {
      r.error_kind = j.at("error").get<std::string>();
      r.message = j.at("message").get<std::string>();
    }
    if (j.contains("payload")) r.payload = j.at("payload");
    if (j.contains("spill_key")) r.spill_key = j.at("spill_key").get<std::string>();
    const auto& m = j.at("metrics");
    r.metrics.rows_scanned = m.at(0).get<std::uint64_t>();
    r.metrics.rows_emitted = m.at(1).get<std::uint64_t>();
    r.metrics.bytes = m.at(2).get<std::uint64_t>();
    r.metrics.scan = sim::Duration(m.at(3).get<std::int64_t>());
    r.metrics.exchange = sim::Duration(m.at(4).get<std::int64_t>());
    r.metrics.fragment = sim::Duration(m.at(5).get<std::int64_t>());
    r.metrics.body_start = sim::Duration(m.at(6).get<std::int64_t>());
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed worker result: ") + e.what());
  }
}

Json table_json(const lcf::Table& table) {
  Json cols = Json::array();
  for (const auto& c : table.columns) std::visit([&](const auto& v) { cols.push_back(v); }, c);
  return cols;
}

lcf::Table table_from_json(const Json& j, const lcf::Schema& schema) {
  lcf::Table t;
  if (j.empty()) {
    for (const auto& c : schema.columns()) {
      if (c.type == lcf::ColumnType::kInt64) t.columns.emplace_back(std::vector<std::int64_t>{});
      else t.columns.emplace_back(std::vector<double>{});
    }
    return t;
  }
  try {
    if (j.size() != schema.size()) throw Error(ErrorKind::kInvalidArgument, "row payload has the wrong column count");
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].type == lcf::ColumnType::kInt64)
        t.columns.emplace_back(j.at(i).get<std::vector<std::int64_t>>());
      else
        t.columns.emplace_back(j.at(i).get<std::vector<double>>());
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed row payload: ") + e.what());
  }
  return t;
}

}  // namespace lambada::engine
