#pragma once

#include "lambada/engine/fragment.hpp"
#include "lambada/sim/billing.hpp"
#include "lambada/sim/faas.hpp"
#include "lambada/sim/message_queue.hpp"

namespace lambada::engine {

struct WorkerServices {
  sim::ObjectStore& store;
  sim::QueueService& queues;
  const sim::PriceSheet& prices;
};

/// Runs a fragment's operators on `node` and returns its result without
/// posting it. Failures are reported in the result rather than thrown.
sim::Task<WorkerResult> execute_fragment(WorkerServices services, sim::Node& node, PlanFragment fragment);

/// Worker event handler: decodes the fragment, executes it and posts exactly
/// one WorkerResult to the fragment's result queue. Results larger than a
/// queue message are written to the spill bucket and posted as a pointer.
sim::Task<void> run_worker(WorkerServices services, sim::WorkerContext& ctx, sim::Bytes payload);

}  // namespace lambada::engine
