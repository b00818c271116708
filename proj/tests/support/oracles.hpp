#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "pipeorgan/dataflow.hpp"
#include "pipeorgan/noc.hpp"
#include "pipeorgan/perf.hpp"
#include "pipeorgan/workload.hpp"

namespace pipeorgan::testing {

// Block-level lockstep replay of a producer/consumer pair. The producer
// commits an output region whenever a step of its uncontracted loop prefix
// completes; the consumer retires an input region when the loops above its
// first non-input rank step (everything below re-reads the same data). Both
// walks run over the shared tensor as element sets; a synchronization point is
// any moment the committed set equals the retired set. Returns the gap between
// consecutive sync points, which must be uniform.
int64_t lockstep_granularity(const LayerNode& producer, const Dataflow& pdf,
                             const LayerNode& consumer, const Dataflow& cdf);

// Straight loop-nest MAC count: seven nested loops with the group-match test
// inside, three for GEMM.
int64_t brute_mac_count(const LayerNode& layer);

struct DesResult {
  std::map<Link, int64_t> crossings;  // packets that traversed each link
  int64_t worst = 0;
  int64_t max_hops = 0;
  int64_t drain_cycles = 0;
};

// Cycle-stepped FIFO simulation: every flow becomes ceil(bytes/flit) packets
// injected at once, each link forwards one packet per cycle, run to drain.
// Routing is re-derived here (column axis then row axis, greedy express hops)
// rather than taken from the library.
DesResult des_channel_loads(const Topology& topo, const FlowSet& flows,
                            int64_t link_flit_bytes);

// Agenda-driven schedule replay. Producer output is handed over in equal
// chunks; consumer interval t starts once its own interval t-1 is done and the
// producer has covered the tensor fraction (t+1)/n, found by scanning producer
// chunks upward. Returns the completion time of the last op's last interval.
int64_t schedule_latency(const std::vector<OpSchedule>& ops);

}  // namespace pipeorgan::testing
