#include "pipeorgan/perf.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace pipeorgan {

static int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

static int64_t reduction_depth(const LayerNode& layer) {
  if (layer.kind == LayerKind::GEMM) return layer.dim('K');
  return layer.dim('C') * layer.dim('R') * layer.dim('S') / layer.groups;
}

int64_t compute_interval(const LayerNode& layer, int64_t pe_count,
                         int64_t granularity_elements, const ArchConfig& config) {
  if (layer.kind == LayerKind::COMPLEX) return 0;
  if (pe_count < 1) throw std::invalid_argument("compute_interval: no PEs");
  if (granularity_elements < 1)
    throw std::invalid_argument("compute_interval: zero granularity");
  int64_t per_pe = ceil_div(granularity_elements, pe_count);
  int64_t dot = layer.groups > 1 ? 1 : config.dot_width;
  return std::max<int64_t>(1, ceil_div(reduction_depth(layer) * per_pe, dot));
}

IntervalTiming interval_delay(int64_t compute_cycles, const LoadReport& load, DelayModel model) {
  IntervalTiming t;
  t.compute_cycles = compute_cycles;
  if (model == DelayModel::SERIALIZATION) {
    t.comm_cycles = std::max(load.worst_load, load.max_hops);
    t.delay = std::max(compute_cycles, t.comm_cycles);
  } else {
    // Congestion kicks in when an interval cannot cover the longest path;
    // every packet on the hottest channel then serializes a full interval.
    if (compute_cycles >= load.max_hops) {
      t.comm_cycles = load.max_hops;
      t.delay = compute_cycles;
    } else {
      t.comm_cycles = load.worst_load * compute_cycles;
      t.delay = load.worst_load * compute_cycles;
    }
  }
  t.congested = t.delay > std::max<int64_t>(compute_cycles, 1);
  t.delay = std::max<int64_t>(t.delay, 1);
  return t;
}

int64_t OpSchedule::delay(int64_t t) const {
  if (delays.empty()) throw std::invalid_argument("op schedule without delays");
  return delays.size() == 1 ? delays[0] : delays.at(t);
}

int64_t pipeline_latency(const std::vector<OpSchedule>& ops) {
  if (ops.empty()) return 0;
  for (auto& op : ops) {
    if (op.intervals < 1) throw std::invalid_argument("op needs at least one interval");
    if (op.delays.size() != 1 && static_cast<int64_t>(op.delays.size()) != op.intervals)
      throw std::invalid_argument("per-interval delay count does not match intervals");
  }

  std::vector<int64_t> prev;  // finish times of the upstream op
  std::vector<int64_t> cur;
  for (size_t j = 0; j < ops.size(); ++j) {
    const OpSchedule& op = ops[j];
    cur.assign(op.intervals, 0);
    int64_t own_ready = 0;
    for (int64_t t = 0; t < op.intervals; ++t) {
      int64_t start = own_ready;
      if (j > 0) {
        // Quantum parity with the producer: interval t consumes through
        // fraction (t+1)/n of the tensor, so it waits on the producer
        // interval covering the same fraction.
        int64_t n_prev = static_cast<int64_t>(prev.size());
        int64_t need = ceil_div((t + 1) * n_prev, op.intervals);
        start = std::max(start, prev[need - 1]);
      }
      cur[t] = start + op.delay(t);
      own_ready = cur[t];
    }
    prev = std::move(cur);
  }
  return prev.back();
}

static int64_t weight_stream_multiplier(int64_t weight_bytes, int64_t sram_bytes) {
  if (weight_bytes <= sram_bytes) return 1;
  return ceil_div(weight_bytes, sram_bytes);
}

DramTraffic dram_accesses(const PipelinePlan& plan, const ModelGraph& graph,
                          const ArchConfig& config) {
  DramTraffic total;
  for (auto& sp : plan.segments) {
    const PipelineSegment& seg = sp.segment;
    auto inside = [&](int64_t i) { return i >= seg.first && i < seg.first + seg.depth; };

    const LayerNode& head = graph.layers[seg.first];
    const LayerNode& tail = graph.layers[seg.first + seg.depth - 1];
    if (head.kind == LayerKind::COMPLEX) continue;  // marker, not modeled

    int64_t weights = 0;
    for (int64_t i = seg.first; i < seg.first + seg.depth; ++i)
      weights += tensor_info(graph.layers[i], TensorRole::WEIGHT).bytes;

    int64_t read = tensor_info(head, TensorRole::INPUT_ACT).bytes +
                   weights * weight_stream_multiplier(weights, config.sram_bytes);
    int64_t written = tensor_info(tail, TensorRole::OUTPUT_ACT).bytes;

    std::set<int64_t> skip_sources_read;
    std::set<int64_t> skip_sources_written;
    for (auto& [src, dst] : graph.skip_edges) {
      if (graph.layers[src].kind == LayerKind::COMPLEX) continue;
      int64_t bytes = tensor_info(graph.layers[src], TensorRole::OUTPUT_ACT).bytes;
      if (inside(dst) && !inside(src)) {
        if (skip_sources_read.insert(src).second) read += bytes;
      } else if (inside(src) && !inside(dst) && src != seg.first + seg.depth - 1) {
        // interior output leaves the window; the tail's write is already
        // counted, and one spill serves every consumer of the same tensor
        if (skip_sources_written.insert(src).second) written += bytes;
      }
    }
    total.bytes_read += read;
    total.bytes_written += written;
  }
  return total;
}

PerfReport end_to_end(const PipelinePlan& plan, const ModelGraph& graph,
                      const ArchConfig& config, TopoKind topo_kind, DelayModel delay_model) {
  Topology topo = build_topology(topo_kind, config.rows, config.cols, config.amp_link_len);
  PerfReport report;

  for (auto& sp : plan.segments) {
    const PipelineSegment& seg = sp.segment;
    SegmentPerf perf;
    perf.first = seg.first;
    perf.depth = seg.depth;

    if (graph.layers[seg.first].kind == LayerKind::COMPLEX) {
      report.segments.push_back(perf);
      continue;
    }

    FlowSet flows = generate_traffic(sp, graph, config);
    LoadReport load = channel_loads(topo, flows, config.link_flit_bytes);
    perf.worst_load = load.worst_load;
    perf.max_hops = load.max_hops;

    // Per-op interval counts: producers pace themselves by their outgoing
    // quantum; the tail op consumes at its incoming pace.
    std::vector<OpSchedule> ops(seg.depth);
    std::vector<int64_t> out_elements(seg.depth);
    for (int64_t i = 0; i < seg.depth; ++i)
      out_elements[i] =
          tensor_info(graph.layers[seg.first + i], TensorRole::OUTPUT_ACT).volume;
    for (int64_t i = 0; i < seg.depth; ++i) {
      int64_t n = 1;
      if (i + 1 < seg.depth) {
        int64_t g = seg.pairs[i].granularity.elements;
        n = std::max<int64_t>(1, ceil_div(out_elements[i], g));
      } else if (i > 0) {
        int64_t g = seg.pairs[i - 1].granularity.elements;
        n = std::max<int64_t>(1, ceil_div(out_elements[i - 1], g));
      }
      ops[i].intervals = n;
      int64_t per_interval = ceil_div(out_elements[i], n);
      int64_t compute =
          compute_interval(graph.layers[seg.first + i], sp.pe_counts[i], per_interval, config);
      IntervalTiming timing = interval_delay(compute, load, delay_model);
      ops[i].delays = {timing.delay};
      perf.congested = perf.congested || timing.congested;
      perf.intervals = std::max(perf.intervals, n);
    }

    perf.pipeline_cycles = pipeline_latency(ops);
    perf.energy = hop_energy(topo, flows, 1.0) * static_cast<double>(perf.intervals);

    PipelinePlan only_this;
    only_this.kind = plan.kind;
    only_this.segments.push_back(sp);
    perf.dram = dram_accesses(only_this, graph, config);
    perf.dram_cycles = ceil_div(perf.dram.bytes_read + perf.dram.bytes_written, config.dram_bw);
    perf.total_cycles = std::max(perf.pipeline_cycles, perf.dram_cycles);

    report.segments.push_back(perf);
  }

  for (auto& perf : report.segments) {
    report.total_cycles += perf.total_cycles;
    report.dram_bytes_read += perf.dram.bytes_read;
    report.dram_bytes_written += perf.dram.bytes_written;
    report.worst_load = std::max(report.worst_load, perf.worst_load);
    report.hop_energy += perf.energy;
  }
  return report;
}

}  // namespace pipeorgan
