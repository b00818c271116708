#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pipeorgan/placement.hpp"

namespace pipeorgan {

enum class TopoKind { MESH, AMP };

std::string to_string(TopoKind kind);

struct PE {
  int64_t row = 0;
  int64_t col = 0;

  bool operator==(const PE&) const = default;
  auto operator<=>(const PE&) const = default;
};

struct Link {
  PE a;
  PE b;
  int64_t length = 1;  // physical span in PE pitches

  bool operator==(const Link&) const = default;
  auto operator<=>(const Link&) const = default;
};

// MESH: unit links between 4-neighbours. AMP keeps the mesh and adds express
// links of span L = round(sqrt(rows/2)) along every row and column. A span
// below 2 would duplicate mesh links, so it is rejected.
struct Topology {
  TopoKind kind = TopoKind::MESH;
  int64_t rows = 0;
  int64_t cols = 0;
  int64_t long_len = 0;  // 0 for MESH
  std::vector<Link> links;
};

Topology build_topology(TopoKind kind, int64_t rows, int64_t cols,
                        int64_t long_len_override = 0);

// Dimension-ordered: columns first, then rows. AMP greedily takes the express
// link along the current axis while the remaining distance covers its span.
std::vector<Link> route(const Topology& topo, PE src, PE dst);

enum class FlowTag { PIPE, SKIP, GB };

struct Flow {
  PE src;
  PE dst;
  int64_t bytes = 0;
  FlowTag tag = FlowTag::PIPE;
};

using FlowSet = std::vector<Flow>;

// Per-interval traffic of one mapped segment. Producer PEs split the pair
// quantum evenly and send to the consumer PEs owning the aliased region,
// paired round-robin in coordinate order. Skip sources re-send their share
// every interval; global-buffer traffic runs to the top-row node of its column.
FlowSet generate_traffic(const SegmentPlan& seg_plan, const ModelGraph& graph,
                         const ArchConfig& config);

struct LoadReport {
  std::map<Link, std::pair<int64_t, int64_t>> per_link;  // link -> (packets, bytes)
  int64_t worst_load = 0;  // packets on the hottest link per interval
  int64_t max_hops = 0;
  bool congested = false;  // filled by the delay model, not here
};

// A packet is one flit of link_flit_bytes; every flow ships at least one.
LoadReport channel_loads(const Topology& topo, const FlowSet& flows,
                         int64_t link_flit_bytes);

// Sum over flows of bytes * physical path length * unit_energy. Express links
// cost their span, so AMP saves hops, not wire energy.
double hop_energy(const Topology& topo, const FlowSet& flows, double unit_energy);

}  // namespace pipeorgan
