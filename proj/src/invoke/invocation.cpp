#include "lambada/invoke/invocation.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::invoke {

namespace {

void put_u64(sim::Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(sim::Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct Reader {
  const sim::Bytes& in;
  std::size_t pos = 0;

  std::uint64_t take(int bytes) {
    if (in.size() - pos < static_cast<std::size_t>(bytes)) {
      throw Error(ErrorKind::kInvalidArgument, "truncated invocation payload");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[pos + static_cast<std::size_t>(i)]} << (8 * i);
    pos += static_cast<std::size_t>(bytes);
    return v;
  }
  sim::Bytes bytes() {
    const auto n = static_cast<std::size_t>(take(4));
    if (in.size() - pos < n) throw Error(ErrorKind::kInvalidArgument, "truncated invocation payload");
    sim::Bytes out(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    return out;
  }
};

// worker id, child calls, own payload
sim::Bytes encode_call(const WorkerCall& self, const std::vector<WorkerCall>& children) {
  sim::Bytes out;
  put_u64(out, self.id);
  put_u32(out, static_cast<std::uint32_t>(children.size()));
  for (const auto& c : children) {
    put_u64(out, c.id);
    put_u32(out, static_cast<std::uint32_t>(c.payload.size()));
    out.insert(out.end(), c.payload.begin(), c.payload.end());
  }
  put_u32(out, static_cast<std::uint32_t>(self.payload.size()));
  out.insert(out.end(), self.payload.begin(), self.payload.end());
  return out;
}

std::uint64_t ceil_sqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

struct DecodedCall {
  WorkerCall self;
  std::vector<WorkerCall> children;
};

DecodedCall decode_call(const sim::Bytes& in) {
  Reader r{in};
  DecodedCall d;
  d.self.id = r.take(8);
  const auto n = r.take(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    WorkerCall c;
    c.id = r.take(8);
    c.payload = r.bytes();
    d.children.push_back(std::move(c));
  }
  d.self.payload = r.bytes();
  return d;
}

}  // namespace

std::string_view strategy_name(Strategy s) { return s == Strategy::kDirect ? "direct" : "two-level"; }

Strategy parse_strategy(std::string_view text) {
  if (text == "direct") return Strategy::kDirect;
  if (text == "two-level" || text == "two_level") return Strategy::kTwoLevel;
  throw Error(ErrorKind::kConfigError, fmt::format("unknown invocation strategy '{}'", text));
}

InvocationPlan build_plan(std::uint64_t workers, Strategy strategy, const PayloadFactory& payloads,
                          std::uint64_t first_gen) {
  if (workers < 1) throw Error(ErrorKind::kInvalidArgument, "a plan needs at least one worker");
  InvocationPlan plan;
  plan.workers = workers;
  plan.strategy = workers == 1 ? Strategy::kDirect : strategy;
  auto call = [&](std::uint64_t id) { return WorkerCall{id, payloads ? payloads(id) : sim::Bytes{}}; };
  if (plan.strategy == Strategy::kDirect) {
    for (std::uint64_t id = 0; id < workers; ++id) plan.first_gen.push_back({call(id), {}});
    return plan;
  }
  const std::uint64_t g = std::min(workers, first_gen == 0 ? ceil_sqrt(workers) : first_gen);
  const std::uint64_t rest = workers - g;
  const std::uint64_t base = rest / g;
  const std::uint64_t larger = rest % g;
  std::uint64_t next = g;
  for (std::uint64_t i = 0; i < g; ++i) {
    Assignment a{call(i), {}};
    const std::uint64_t n = base + (i < larger ? 1 : 0);
    for (std::uint64_t j = 0; j < n; ++j) a.children.push_back(call(next++));
    plan.first_gen.push_back(std::move(a));
  }
  return plan;
}

sim::Duration predict_last_initiation(const InvocationPlan& plan, const sim::InvocationModel& model) {
  double last = 0;
  for (std::size_t i = 0; i < plan.first_gen.size(); ++i) {
    const double driver = static_cast<double>(i + 1) / model.driver_rate_per_s;
    last = std::max(last, driver);
    const auto n = plan.first_gen[i].children.size();
    if (n > 0) {
      last = std::max(last, driver + sim::to_seconds(model.driver_latency) +
                                static_cast<double>(n) / model.worker_rate_per_s);
    }
  }
  return sim::from_seconds(last);
}

std::string InvocationReport::workers_csv() const {
  std::string out = "worker,generation,parent,initiated_s,started_s,cold\n";
  for (const auto& w : workers) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{}\n", w.worker, w.generation,
                       w.parent ? std::to_string(*w.parent) : std::string("driver"), sim::to_seconds(w.initiated),
                       sim::to_seconds(w.started), w.cold ? 1 : 0);
  }
  return out;
}

std::string InvocationReport::phases_csv() const {
  std::string out = "worker,driver_delay_s,invocation_latency_s,second_gen_s\n";
  for (const auto& w : workers) {
    if (w.generation != 1) continue;
    const auto second = w.children_done > w.started ? w.children_done - w.started : sim::Duration{0};
    out += fmt::format("{},{:.6f},{:.6f},{:.6f}\n", w.worker, sim::to_seconds(w.initiated),
                       sim::to_seconds(w.started - w.initiated), sim::to_seconds(second));
  }
  return out;
}

Launcher::Launcher(sim::FaasService& faas, std::string function) : faas_(faas), function_(std::move(function)) {}

void Launcher::register_function(sim::FunctionSpec spec, WorkerBody body) {
  if (spec.name != function_) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("launcher for '{}' got function '{}'", function_, spec.name));
  }
  if (!body) throw Error(ErrorKind::kInvalidArgument, "worker body must be callable");
  faas_.register_function(std::move(spec), [this, body](sim::WorkerContext& ctx) { return handle(ctx, body); });
}

sim::Task<void> Launcher::handle(sim::WorkerContext& ctx, WorkerBody body) {
  DecodedCall call = decode_call(ctx.payload());
  const std::uint64_t me = call.self.id;
  if (me >= workers_) throw Error(ErrorKind::kInvalidArgument, fmt::format("worker id {} outside the plan", me));
  for (auto& child : call.children) {
    const auto id = co_await faas_.invoke(ctx.invoker(), function_, encode_call(child, {}));
    invocation_of_[child.id] = id;
    parent_of_[child.id] = me;
    children_done_[me] = faas_.record(id).initiated_at;
  }
  co_await body(ctx, me, call.self.payload);
}

sim::Task<void> Launcher::launch(InvocationPlan plan) {
  auto& sim = faas_.sim();
  workers_ = plan.workers;
  origin_ = sim.now();
  invocation_of_.assign(workers_, std::nullopt);
  parent_of_.assign(workers_, std::nullopt);
  children_done_.assign(workers_, sim::SimTime{});
  issued_.clear();
  sim::Invoker driver = faas_.driver_invoker();
  for (auto& a : plan.first_gen) {
    const auto id = co_await faas_.invoke(driver, function_, encode_call(a.self, a.children));
    invocation_of_[a.self.id] = id;
    issued_.push_back(a.self.id);
  }
}

sim::Task<void> Launcher::wait_all() {
  // First-generation workers start their children before doing anything else,
  // so once they are done every child invocation is known.
  for (auto w : issued_) co_await faas_.wait(*invocation_of_[w]);
  for (std::uint64_t w = 0; w < workers_; ++w) {
    if (!invocation_of_[w]) {
      throw Error(ErrorKind::kWorkerError, fmt::format("worker {} was never invoked", w));
    }
    co_await faas_.wait(*invocation_of_[w]);
  }
}

InvocationReport Launcher::report() const {
  InvocationReport r;
  for (std::uint64_t w = 0; w < workers_; ++w) {
    if (!invocation_of_[w]) continue;
    const auto& rec = faas_.record(*invocation_of_[w]);
    WorkerLaunch l;
    l.worker = w;
    l.parent = parent_of_[w];
    l.generation = l.parent ? 2 : 1;
    l.invocation = rec.id;
    l.initiated = rec.initiated_at - origin_;
    l.started = rec.started_at - origin_;
    l.children_done = children_done_[w] > origin_ ? children_done_[w] - origin_ : sim::Duration{0};
    l.cold = rec.cold;
    r.last_initiated = std::max(r.last_initiated, l.initiated);
    r.last_started = std::max(r.last_started, l.started);
    r.workers.push_back(l);
  }
  return r;
}

std::vector<std::pair<std::uint64_t, std::string>> Launcher::failures() const {
  std::vector<std::pair<std::uint64_t, std::string>> out;
  for (std::uint64_t w = 0; w < workers_; ++w) {
    if (!invocation_of_[w]) continue;
    const auto& rec = faas_.record(*invocation_of_[w]);
    if (!rec.error.empty()) out.emplace_back(w, rec.error);
  }
  return out;
}

sim::Task<InvocationReport> run_plan(sim::FaasService& faas, InvocationPlan plan, sim::FunctionSpec spec) {
  Launcher launcher(faas, spec.name);
  launcher.register_function(spec, [](sim::WorkerContext&, std::uint64_t, const sim::Bytes&) -> sim::Task<void> {
    co_return;
  });
  co_await launcher.launch(std::move(plan));
  co_await launcher.wait_all();
  co_return launcher.report();
}

}  // namespace lambada::invoke
