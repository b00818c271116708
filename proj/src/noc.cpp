#include "pipeorgan/noc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pipeorgan {

std::string to_string(TopoKind kind) {
  return kind == TopoKind::MESH ? "mesh" : "amp";
}

Topology build_topology(TopoKind kind, int64_t rows, int64_t cols, int64_t long_len_override) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("topology needs at least a 2x2 array");
  Topology topo;
  topo.kind = kind;
  topo.rows = rows;
  topo.cols = cols;
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c + 1 < cols; ++c) topo.links.push_back({{r, c}, {r, c + 1}, 1});
  for (int64_t c = 0; c < cols; ++c)
    for (int64_t r = 0; r + 1 < rows; ++r) topo.links.push_back({{r, c}, {r + 1, c}, 1});

  if (kind == TopoKind::AMP) {
    int64_t span = long_len_override != 0
                       ? long_len_override
                       : std::llround(std::sqrt(static_cast<double>(rows) / 2.0));
    if (span < 2)
      throw std::invalid_argument("express link span " + std::to_string(span) +
                                  " would duplicate mesh links (need >= 2)");
    if (span >= rows || span >= cols)
      throw std::invalid_argument("express link span " + std::to_string(span) +
                                  " does not fit a " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " array");
    topo.long_len = span;
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c + span < cols; ++c) topo.links.push_back({{r, c}, {r, c + span}, span});
    for (int64_t c = 0; c < cols; ++c)
      for (int64_t r = 0; r + span < rows; ++r) topo.links.push_back({{r, c}, {r + span, c}, span});
  }
  std::sort(topo.links.begin(), topo.links.end());
  return topo;
}

static Link make_link(PE a, PE b, int64_t length) {
  return a < b ? Link{a, b, length} : Link{b, a, length};
}

static void walk_axis(const Topology& topo, PE& at, int64_t PE::*axis, int64_t target,
                      std::vector<Link>& path) {
  while (at.*axis != target) {
    int64_t left = std::abs(target - at.*axis);
    int64_t step = (target > at.*axis) ? 1 : -1;
    int64_t span = (topo.kind == TopoKind::AMP && left >= topo.long_len) ? topo.long_len : 1;
    PE next = at;
    next.*axis += step * span;
    path.push_back(make_link(at, next, span));
    at = next;
  }
}

std::vector<Link> route(const Topology& topo, PE src, PE dst) {
  auto in_bounds = [&](PE pe) {
    return pe.row >= 0 && pe.row < topo.rows && pe.col >= 0 && pe.col < topo.cols;
  };
  if (!in_bounds(src) || !in_bounds(dst))
    throw std::invalid_argument("route endpoint outside the array");
  std::vector<Link> path;
  PE at = src;
  walk_axis(topo, at, &PE::col, dst.col, path);
  walk_axis(topo, at, &PE::row, dst.row, path);
  return path;
}

static PE pe_at(const Placement& placement, int64_t pe_id) {
  return {pe_id / placement.cols, pe_id % placement.cols};
}

// Split `bytes` across `senders`, pair sender i with the receiver block
// [i*nr/ns, (i+1)*nr/ns) and split its share across that block. Shares are
// exact (no padding bytes), so per-interval flow bytes sum to `bytes`; when
// bytes < senders only the first `bytes` senders ship anything.
static void spread_flows(FlowSet& flows, const std::vector<int64_t>& senders,
                         const std::vector<int64_t>& receivers, int64_t bytes, FlowTag tag,
                         const Placement& placement) {
  int64_t ns = static_cast<int64_t>(senders.size());
  int64_t nr = static_cast<int64_t>(receivers.size());
  if (ns == 0 || nr == 0 || bytes <= 0) return;
  for (int64_t i = 0; i < ns; ++i) {
    int64_t share = bytes / ns + (i < bytes % ns ? 1 : 0);
    if (share == 0) continue;
    int64_t lo = i * nr / ns;
    int64_t hi = std::max((i + 1) * nr / ns, lo + 1);
    int64_t fanout = hi - lo;
    for (int64_t j = lo; j < hi; ++j) {
      int64_t part = share / fanout + (j - lo < share % fanout ? 1 : 0);
      if (part == 0) continue;
      PE src = pe_at(placement, senders[i]);
      PE dst = pe_at(placement, receivers[j]);
      if (src == dst) continue;
      flows.push_back({src, dst, part, tag});
    }
  }
}

static void gb_flows(FlowSet& flows, const std::vector<int64_t>& pes, int64_t bytes,
                     bool to_buffer, const Placement& placement) {
  int64_t n = static_cast<int64_t>(pes.size());
  if (n == 0 || bytes <= 0) return;
  for (int64_t i = 0; i < n; ++i) {
    int64_t share = bytes / n + (i < bytes % n ? 1 : 0);
    if (share == 0) continue;
    PE pe = pe_at(placement, pes[i]);
    PE edge{0, pe.col};  // nearest buffer-side node: top of the column
    if (pe == edge) continue;
    if (to_buffer)
      flows.push_back({pe, edge, share, FlowTag::GB});
    else
      flows.push_back({edge, pe, share, FlowTag::GB});
  }
}

FlowSet generate_traffic(const SegmentPlan& seg_plan, const ModelGraph& graph,
                         const ArchConfig& config) {
  (void)config;
  const PipelineSegment& seg = seg_plan.segment;
  const Placement& placement = seg_plan.placement;
  if (static_cast<int64_t>(placement.layer_pes.size()) != seg.depth)
    throw std::invalid_argument("placement does not cover the segment's layers");

  FlowSet flows;
  bool via_gb = seg_plan.org.strategy == OrgStrategy::GB_BLOCKED;

  int64_t intervals = 1;
  for (int64_t i = 0; i + 1 < seg.depth; ++i) {
    const LayerNode& producer = graph.layers[seg.first + i];
    int64_t volume = tensor_info(producer, TensorRole::OUTPUT_ACT).volume;
    int64_t g = seg.pairs[i].granularity.elements;
    if (g > 0) intervals = std::max(intervals, (volume + g - 1) / g);
  }

  for (int64_t i = 0; i + 1 < seg.depth; ++i) {
    const LayerNode& producer = graph.layers[seg.first + i];
    int64_t quantum_bytes = seg.pairs[i].granularity.elements * producer.bytes_per_element;
    if (via_gb) {
      gb_flows(flows, placement.layer_pes[i], quantum_bytes, true, placement);
      gb_flows(flows, placement.layer_pes[i + 1], quantum_bytes, false, placement);
    } else {
      spread_flows(flows, placement.layer_pes[i], placement.layer_pes[i + 1], quantum_bytes,
                   FlowTag::PIPE, placement);
    }
  }

  auto inside = [&](int64_t layer) { return layer >= seg.first && layer < seg.first + seg.depth; };
  for (auto& [src, dst] : graph.skip_edges) {
    if (graph.layers[src].kind == LayerKind::COMPLEX) continue;
    int64_t total = tensor_info(graph.layers[src], TensorRole::OUTPUT_ACT).bytes;
    int64_t per_interval = std::max<int64_t>(1, total / intervals);
    if (inside(src) && inside(dst)) {
      spread_flows(flows, placement.layer_pes[src - seg.first], placement.layer_pes[dst - seg.first],
                   per_interval, FlowTag::SKIP, placement);
    } else if (inside(src)) {
      gb_flows(flows, placement.layer_pes[src - seg.first], per_interval, true, placement);
    } else if (inside(dst)) {
      gb_flows(flows, placement.layer_pes[dst - seg.first], per_interval, false, placement);
    }
  }
  return flows;
}

LoadReport channel_loads(const Topology& topo, const FlowSet& flows, int64_t link_flit_bytes) {
  if (link_flit_bytes < 1) throw std::invalid_argument("flit size must be positive");
  LoadReport report;
  for (auto& flow : flows) {
    std::vector<Link> path = route(topo, flow.src, flow.dst);
    report.max_hops = std::max(report.max_hops, static_cast<int64_t>(path.size()));
    int64_t packets = (flow.bytes + link_flit_bytes - 1) / link_flit_bytes;
    for (auto& link : path) {
      auto& [p, b] = report.per_link[link];
      p += packets;
      b += flow.bytes;
    }
  }
  for (auto& [link, load] : report.per_link)
    report.worst_load = std::max(report.worst_load, load.first);
  return report;
}

double hop_energy(const Topology& topo, const FlowSet& flows, double unit_energy) {
  double total = 0.0;
  for (auto& flow : flows) {
    int64_t pitch = 0;
    for (auto& link : route(topo, flow.src, flow.dst)) pitch += link.length;
    total += static_cast<double>(flow.bytes) * static_cast<double>(pitch) * unit_energy;
  }
  return total;
}

}  // namespace pipeorgan
