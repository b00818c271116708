#pragma once

#include <cstdint>
#include <vector>

#include "pipeorgan/noc.hpp"
#include "pipeorgan/placement.hpp"
#include "pipeorgan/workload.hpp"

namespace pipeorgan {

// Cycles one PE spends producing its share of one quantum:
// ceil(reduction_depth * elements_per_pe / dot_width), at least 1.
// Grouped convolutions get no dot-product reduction (effective width 1).
int64_t compute_interval(const LayerNode& layer, int64_t pe_count,
                         int64_t granularity_elements, const ArchConfig& config);

enum class DelayModel { SERIALIZATION, PAPER_LITERAL };

struct IntervalTiming {
  int64_t compute_cycles = 0;
  int64_t comm_cycles = 0;
  int64_t delay = 0;
  bool congested = false;
};

// SERIALIZATION: max(compute, worst_load flits, max hops). PAPER_LITERAL:
// compute when it covers the hop count, otherwise worst_load * compute.
IntervalTiming interval_delay(int64_t compute_cycles, const LoadReport& load,
                              DelayModel model);

struct OpSchedule {
  int64_t intervals = 0;
  std::vector<int64_t> delays;  // size 1 = uniform, else one per interval
  int64_t delay(int64_t t) const;
};

// Waterfall latency. Interval t of op j waits for its own interval t-1 and for
// ceil((t+1) * n_prev / n_cur) producer intervals, which is the ops-ratio
// normalization: a consumer doing half the intervals absorbs two producer
// quanta per step, so the producer-side delay amortizes by that ratio.
int64_t pipeline_latency(const std::vector<OpSchedule>& ops);

struct DramTraffic {
  int64_t bytes_read = 0;
  int64_t bytes_written = 0;
};

// Per segment: read the first input, the resident weights (re-streamed
// ceil(sum_w / sram) times when they exceed SRAM; activations stream through
// interval-sized buffers and do not claim residency), and incoming crossing
// skips; write the last output and interior outputs exported over skips.
DramTraffic dram_accesses(const PipelinePlan& plan, const ModelGraph& graph,
                          const ArchConfig& config);

struct SegmentPerf {
  int64_t first = 0;
  int64_t depth = 1;
  int64_t intervals = 0;
  int64_t pipeline_cycles = 0;
  int64_t dram_cycles = 0;
  int64_t total_cycles = 0;  // max of the two (overlapped transfer)
  int64_t worst_load = 0;
  int64_t max_hops = 0;
  bool congested = false;
  double energy = 0.0;
  DramTraffic dram;
};

struct PerfReport {
  int64_t total_cycles = 0;
  int64_t dram_bytes_read = 0;
  int64_t dram_bytes_written = 0;
  int64_t worst_load = 0;
  double hop_energy = 0.0;
  std::vector<SegmentPerf> segments;
};

PerfReport end_to_end(const PipelinePlan& plan, const ModelGraph& graph,
                      const ArchConfig& config, TopoKind topo_kind,
                      DelayModel delay_model = DelayModel::SERIALIZATION);

}  // namespace pipeorgan
